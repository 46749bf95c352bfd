#pragma once

#include <string>

#include "json.hpp"
#include "qbc/protocol.hpp"

namespace qbc {

// Objects are std::map backed, so keys always serialize sorted.
using Json = nlohmann::json;

inline constexpr int kProtocolFormatVersion = 1;
inline constexpr const char* kProtocolFormat = "qbc-protocol";

// Reals travel as "%.17g" strings so that parsing restores the same double.
std::string format_number(double x);
Json number(double x);
double parse_number(const Json& j, const std::string& path);

// {"rows", "cols", "data": [[re, im], ...]} in row-major order.
Json matrix_to_json(const CMatrix& m);
CMatrix matrix_from_json(const Json& j, const std::string& path);

Json label_to_json(const Label& x);
Label label_from_json(const Json& j, const std::string& path);

Json protocol_to_json(const ProtocolDefinition& p);
// Accepts full definitions and {"generator": {"name": ...}} stubs naming a
// built-in instance. Errors are ConfigError with a JSON-pointer path.
ProtocolDefinition protocol_from_json(const Json& j);
ProtocolDefinition load_protocol(const std::string& path);

}  // namespace qbc
