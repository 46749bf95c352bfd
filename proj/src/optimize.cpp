#include "qbc/optimize.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace qbc {

SimplexResult nelder_mead(const std::function<double(const RVector&)>& f, const RVector& x0, double step,
                          int max_evals, double ftol) {
    const Eigen::Index n = x0.size();
    std::vector<RVector> pts(n + 1, x0);
    std::vector<double> vals(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) pts[i + 1](i) += step;
    SimplexResult res;
    for (Eigen::Index i = 0; i <= n; ++i) vals[i] = f(pts[i]);
    res.evaluations = static_cast<int>(n + 1);
    std::vector<Eigen::Index> order(n + 1);
    while (res.evaluations < max_evals) {
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return vals[a] < vals[b]; });
        const Eigen::Index best = order.front(), worst = order.back(), second = order[n - 1];
        if (vals[worst] - vals[best] <= ftol) break;
        RVector centroid = RVector::Zero(n);
        for (Eigen::Index i = 0; i < n; ++i) centroid += pts[order[i]];
        centroid /= static_cast<double>(n);
        const RVector refl = centroid + (centroid - pts[worst]);
        const double fr = f(refl);
        ++res.evaluations;
        if (fr < vals[best]) {
            const RVector exp = centroid + 2.0 * (centroid - pts[worst]);
            const double fe = f(exp);
            ++res.evaluations;
            if (fe < fr) {
                pts[worst] = exp;
                vals[worst] = fe;
            } else {
                pts[worst] = refl;
                vals[worst] = fr;
            }
        } else if (fr < vals[second]) {
            pts[worst] = refl;
            vals[worst] = fr;
        } else {
            const bool outside = fr < vals[worst];
            const RVector con = outside ? RVector(centroid + 0.5 * (refl - centroid))
                                        : RVector(centroid + 0.5 * (pts[worst] - centroid));
            const double fc = f(con);
            ++res.evaluations;
            if (fc < std::min(fr, vals[worst])) {
                pts[worst] = con;
                vals[worst] = fc;
            } else {
                for (Eigen::Index i = 0; i <= n; ++i) {
                    if (i == best) continue;
                    pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
                    vals[i] = f(pts[i]);
                    ++res.evaluations;
                }
            }
        }
    }
    const auto it = std::min_element(vals.begin(), vals.end());
    res.x = pts[static_cast<std::size_t>(it - vals.begin())];
    res.value = *it;
    return res;
}

CMatrix unitary_from_coords(const RVector& z, int d) {
    if (z.size() != static_cast<Eigen::Index>(d) * d) throw ShapeError("unitary_from_coords: need d^2 coordinates");
    CMatrix h = CMatrix::Zero(d, d);
    int o = 0;
    for (int i = 0; i < d; ++i) h(i, i) = z(o++);
    for (int i = 0; i < d; ++i)
        for (int j = i + 1; j < d; ++j) {
            h(i, j) = cplx(z(o), z(o + 1));
            h(j, i) = std::conj(h(i, j));
            o += 2;
        }
    Eigen::SelfAdjointEigenSolver<CMatrix> es(h);
    CVector phases(d);
    for (int i = 0; i < d; ++i) phases(i) = std::polar(1.0, es.eigenvalues()(i));
    return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace qbc
