#include "gprotor/radial_form.hpp"

#include <cmath>

namespace gprotor {

double RadialForm::kinetic(const ArrayXd& u) const {
    const int n = static_cast<int>(u.size());
    auto cell = [&](int i) -> double {
        if (i >= n) return 0.0;
        if (i < 0) return (parity == 0) ? 0.0 : parity * u[-i - 1];
        return u[i];
    };
    const double c1 = 27.0 / (24.0 * h), c2 = 1.0 / (24.0 * h);
    double s = 0.0;
    for (int j = 1; j <= n - 1; ++j) {
        const double du = c1 * (cell(j) - cell(j - 1)) - c2 * (cell(j + 1) - cell(j - 2));
        s += face_w[j - 1] * du * du;
    }
    return s;
}

double RadialForm::quad(const ArrayXd& u) const {
    return kinetic(u) + (mass * extra * u * u).sum();
}

double RadialForm::mass_sq(const ArrayXd& u) const { return (mass * u * u).sum(); }

BandedSym RadialForm::standardized() const {
    BandedSym s = k;
    const int n = k.n(), bw = k.bw();
    ArrayXd inv_root = mass.sqrt().inverse();
    for (int j = 0; j < n; ++j)
        for (int d = 0; d <= std::min(bw, n - 1 - j); ++d)
            s.at(j + d, j) = k.get(j + d, j) * inv_root[j + d] * inv_root[j];
    return s;
}

RadialForm make_radial_form(const RadialGrid& grid, double measure_power, int parity,
                            const ArrayXd& extra_diag) {
    const int n = grid.size();
    const double h = grid.h;
    RadialForm form;
    form.k = BandedSym(n, 3);
    form.h = h;
    form.parity = parity;
    form.extra = extra_diag;
    form.face_w.resize(n - 1);

    // kinetic: sum over interior faces of w_face * (Du)_face^2 with the
    // 4th-order stencil [1, -27, 27, -1]/(24h); face N is dropped (decay).
    const double c1 = 27.0 / (24.0 * h), c2 = 1.0 / (24.0 * h);
    for (int j = 1; j <= n - 1; ++j) {
        const double rf = j * h;
        const double wf = 2.0 * kPi * h * std::pow(rf, measure_power);
        form.face_w[j - 1] = wf;
        // stencil over cells j-2, j-1, j, j+1
        int idx[4] = {j - 2, j - 1, j, j + 1};
        double coef[4] = {c2, -c1, c1, -c2};
        // fold ghosts: cell -1 reflects to cell 0 with the given parity,
        // cell n is zero.
        double folded[4];
        int cells[4];
        int m = 0;
        for (int t = 0; t < 4; ++t) {
            int c = idx[t];
            double v = coef[t];
            if (c == -1) {
                if (parity == 0) continue;
                c = 0;
                v *= parity;
            } else if (c < -1 || c >= n) {
                continue;
            }
            bool merged = false;
            for (int s = 0; s < m; ++s)
                if (cells[s] == c) {
                    folded[s] += v;
                    merged = true;
                    break;
                }
            if (!merged) {
                cells[m] = c;
                folded[m] = v;
                ++m;
            }
        }
        for (int sA = 0; sA < m; ++sA)
            for (int sB = 0; sB <= sA; ++sB) {
                const int i = std::max(cells[sA], cells[sB]);
                const int jj = std::min(cells[sA], cells[sB]);
                form.k.add_sym(i, jj, wf * folded[sA] * folded[sB]);
            }
    }

    form.mass = 2.0 * kPi * grid.w1d * grid.r.pow(measure_power);
    for (int i = 0; i < n; ++i) form.k.add_sym(i, i, form.mass[i] * extra_diag[i]);
    return form;
}

}  // namespace gprotor
