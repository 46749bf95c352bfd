#include "qbc/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "qbc/instances.hpp"

namespace qbc {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError((path.empty() ? std::string("/") : path) + ": " + what);
}

const Json& field(const Json& j, const std::string& key, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    auto it = j.find(key);
    if (it == j.end()) fail(path, "missing field '" + key + "'");
    return *it;
}

int int_field(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = field(j, key, path);
    if (!v.is_number_integer()) fail(path + "/" + key, "expected an integer");
    return v.get<int>();
}

std::string string_field(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = field(j, key, path);
    if (!v.is_string()) fail(path + "/" + key, "expected a string");
    return v.get<std::string>();
}

bool bool_field(const Json& j, const std::string& key, const std::string& path, bool fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    if (!it->is_boolean()) fail(path + "/" + key, "expected a boolean");
    return it->get<bool>();
}

const Json& array_field(const Json& j, const std::string& key, const std::string& path) {
    const Json& v = field(j, key, path);
    if (!v.is_array()) fail(path + "/" + key, "expected an array");
    return v;
}

Party parse_party(const std::string& s, const std::string& path) {
    if (s == "alice") return Party::Alice;
    if (s == "bob") return Party::Bob;
    fail(path, "unknown party '" + s + "'");
}

std::string party_key(Party p) { return p == Party::Alice ? "alice" : "bob"; }

Json strategy_to_json(const Strategy& s) {
    Json actions = Json::array();
    for (const auto& [x, a] : s.actions) {
        Json msgs = Json::array();
        for (const auto& set : a.messages) {
            Json ks = Json::array();
            for (const auto& k : set) ks.push_back(matrix_to_json(k));
            msgs.push_back(ks);
        }
        actions.push_back(Json{{"label", label_to_json(x)}, {"messages", msgs}});
    }
    return Json{{"name", s.name},
                {"player", party_key(s.player)},
                {"initial_dim", s.initial_dim},
                {"notarized", s.notarized},
                {"actions", actions}};
}

Strategy strategy_from_json(const Json& j, const std::string& path) {
    Strategy s;
    s.name = string_field(j, "name", path);
    s.player = parse_party(string_field(j, "player", path), path + "/player");
    s.initial_dim = int_field(j, "initial_dim", path);
    s.notarized = bool_field(j, "notarized", path, false);
    const Json& actions = array_field(j, "actions", path);
    for (std::size_t i = 0; i < actions.size(); ++i) {
        const std::string ap = path + "/actions/" + std::to_string(i);
        const Label x = label_from_json(field(actions[i], "label", ap), ap + "/label");
        const Json& msgs = array_field(actions[i], "messages", ap);
        Action a;
        for (std::size_t m = 0; m < msgs.size(); ++m) {
            const std::string mp = ap + "/messages/" + std::to_string(m);
            if (!msgs[m].is_array()) fail(mp, "expected an array of Kraus operators");
            KrausSet set;
            for (std::size_t k = 0; k < msgs[m].size(); ++k) set.push_back(matrix_from_json(msgs[m][k], mp + "/" + std::to_string(k)));
            a.messages.push_back(std::move(set));
        }
        if (!s.actions.emplace(x, std::move(a)).second) fail(ap, "duplicate action label");
    }
    return s;
}

ProtocolDefinition from_generator(const Json& g, const std::string& path) {
    const std::string name = string_field(g, "name", path);
    if (name == "bell") return bell_protocol();
    if (name == "anon") {
        const int d = int_field(g, "d", path);
        const double leak = parse_number(field(g, "leak", path), path + "/leak");
        const Json& seed = field(g, "seed", path);
        if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0))
            fail(path + "/seed", "expected a non-negative integer");
        int members = 2;
        if (g.contains("members")) members = int_field(g, "members", path);
        return anonymous_state_protocol(d, leak, Seed{seed.get<std::uint64_t>(), 0}, members);
    }
    fail(path + "/name", "unknown generator '" + name + "'");
}

}  // namespace

std::string format_number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

Json number(double x) { return format_number(x); }

double parse_number(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_string()) fail(path, "expected a number or decimal string");
    const std::string s = j.get<std::string>();
    errno = 0;
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) fail(path, "malformed number '" + s + "'");
    return v;
}

Json matrix_to_json(const CMatrix& m) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) data.push_back(Json::array({number(m(i, k).real()), number(m(i, k).imag())}));
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", data}};
}

CMatrix matrix_from_json(const Json& j, const std::string& path) {
    const int rows = int_field(j, "rows", path);
    const int cols = int_field(j, "cols", path);
    if (rows < 1 || cols < 1) fail(path, "matrix dimensions must be positive");
    const Json& data = array_field(j, "data", path);
    if (data.size() != static_cast<std::size_t>(rows) * cols)
        fail(path + "/data", "expected " + std::to_string(static_cast<long long>(rows) * cols) + " entries, found " +
                                 std::to_string(data.size()));
    CMatrix m(rows, cols);
    for (std::size_t e = 0; e < data.size(); ++e) {
        const std::string ep = path + "/data/" + std::to_string(e);
        if (!data[e].is_array() || data[e].size() != 2) fail(ep, "expected [re, im]");
        m(static_cast<Eigen::Index>(e / cols), static_cast<Eigen::Index>(e % cols)) =
            cplx(parse_number(data[e][0], ep + "/0"), parse_number(data[e][1], ep + "/1"));
    }
    return m;
}

Json label_to_json(const Label& x) { return Json(x); }

Label label_from_json(const Json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array of message symbols");
    Label x;
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number_integer() || j[i].get<int>() < 0) fail(path + "/" + std::to_string(i), "expected a symbol >= 0");
        x.push_back(j[i].get<int>());
    }
    return x;
}

Json protocol_to_json(const ProtocolDefinition& p) {
    Json nodes = Json::array();
    for (const auto& [x, n] : p.tree.nodes())
        nodes.push_back(Json{{"label", label_to_json(x)},
                             {"owner", party_key(n.owner)},
                             {"phase", phase_name(n.phase)},
                             {"message_dims", n.message_dims}});
    Json members = Json::array();
    for (const auto& s : p.bobs.members) members.push_back(strategy_to_json(s));
    Json verifier = Json::array();
    for (const auto& lv : p.verifier.per_bob) {
        Json leaves = Json::array();
        for (const auto& [x, e] : lv)
            leaves.push_back(Json{{"label", label_to_json(x)},
                                  {"accept0", matrix_to_json(e.accept0)},
                                  {"accept1", matrix_to_json(e.accept1)}});
        verifier.push_back(leaves);
    }
    return Json{{"format", kProtocolFormat},
                {"version", kProtocolFormatVersion},
                {"name", p.name},
                {"tree", nodes},
                {"alice", Json::array({strategy_to_json(p.alice[0]), strategy_to_json(p.alice[1])})},
                {"bobs", Json{{"members", members}, {"entangled_record", p.bobs.entangled_record}}},
                {"rho0", matrix_to_json(p.rho0)},
                {"verifier", verifier}};
}

ProtocolDefinition protocol_from_json(const Json& j) {
    if (!j.is_object()) fail("", "expected a protocol object");
    if (string_field(j, "format", "") != kProtocolFormat) fail("/format", "not a protocol definition");
    const int version = int_field(j, "version", "");
    if (version != kProtocolFormatVersion) fail("/version", "unsupported version " + std::to_string(version));
    if (j.contains("generator")) return from_generator(j["generator"], "/generator");

    ProtocolDefinition p;
    p.name = string_field(j, "name", "");
    const Json& nodes = array_field(j, "tree", "");
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const std::string np = "/tree/" + std::to_string(i);
        TreeNode n;
        n.owner = parse_party(string_field(nodes[i], "owner", np), np + "/owner");
        try {
            n.phase = parse_phase(string_field(nodes[i], "phase", np));
        } catch (const ConfigError& e) {
            fail(np + "/phase", e.what());
        }
        const Json& dims = array_field(nodes[i], "message_dims", np);
        for (std::size_t m = 0; m < dims.size(); ++m) {
            if (!dims[m].is_number_integer()) fail(np + "/message_dims/" + std::to_string(m), "expected an integer");
            n.message_dims.push_back(dims[m].get<int>());
        }
        const Label x = label_from_json(field(nodes[i], "label", np), np + "/label");
        if (p.tree.is_node(x)) fail(np + "/label", "duplicate node " + label_string(x));
        try {
            p.tree.add(x, std::move(n));
        } catch (const StructureError& e) {
            fail(np, e.what());
        }
    }
    const Json& alice = array_field(j, "alice", "");
    if (alice.size() != 2) fail("/alice", "expected exactly two honest strategies");
    for (int k = 0; k < 2; ++k) p.alice[k] = strategy_from_json(alice[k], "/alice/" + std::to_string(k));
    const Json& bobs = field(j, "bobs", "");
    const Json& members = array_field(bobs, "members", "/bobs");
    for (std::size_t i = 0; i < members.size(); ++i)
        p.bobs.members.push_back(strategy_from_json(members[i], "/bobs/members/" + std::to_string(i)));
    p.bobs.entangled_record = bool_field(bobs, "entangled_record", "/bobs", false);
    p.rho0 = matrix_from_json(field(j, "rho0", ""), "/rho0");
    const Json& verifier = array_field(j, "verifier", "");
    for (std::size_t b = 0; b < verifier.size(); ++b) {
        const std::string vp = "/verifier/" + std::to_string(b);
        if (!verifier[b].is_array()) fail(vp, "expected an array of leaf effects");
        LeafVerifier lv;
        for (std::size_t i = 0; i < verifier[b].size(); ++i) {
            const std::string lp = vp + "/" + std::to_string(i);
            const Label x = label_from_json(field(verifier[b][i], "label", lp), lp + "/label");
            lv[x] = Effects{matrix_from_json(field(verifier[b][i], "accept0", lp), lp + "/accept0"),
                            matrix_from_json(field(verifier[b][i], "accept1", lp), lp + "/accept1")};
        }
        p.verifier.per_bob.push_back(std::move(lv));
    }
    try {
        p.tree.check();
    } catch (const Error& e) {
        fail("/tree", e.what());
    }
    for (int k = 0; k < 2; ++k)
        for (std::size_t b = 0; b < p.bobs.members.size(); ++b) {
            try {
                validate(p.tree, p.alice[k], p.bobs.members[b]);
            } catch (const Error& e) {
                fail("/alice/" + std::to_string(k) + " vs /bobs/members/" + std::to_string(b), e.what());
            }
        }
    return p;
}

ProtocolDefinition load_protocol(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path + ": cannot open protocol definition");
    std::stringstream ss;
    ss << in.rdbuf();
    Json j;
    try {
        j = Json::parse(ss.str());
    } catch (const Json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    try {
        return protocol_from_json(j);
    } catch (const ConfigError& e) {
        throw ConfigError(path + ":" + e.what());
    }
}

}  // namespace qbc
