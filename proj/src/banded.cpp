#include "gprotor/banded.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace gprotor {

double& BandedSym::at(int i, int j) {
    if (j > i || i - j > bw_ || i >= n_ || j < 0)
        throw std::out_of_range("banded index outside band");
    return b_(i - j, j);
}

double BandedSym::get(int i, int j) const {
    if (i < j) std::swap(i, j);
    if (i - j > bw_) return 0.0;
    return b_(i - j, j);
}

void BandedSym::add_sym(int i, int j, double v) {
    if (i < j) std::swap(i, j);
    at(i, j) += v;
}

Eigen::VectorXd BandedSym::apply(const Eigen::VectorXd& x) const {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(n_);
    for (int j = 0; j < n_; ++j) {
        y[j] += b_(0, j) * x[j];
        const int top = std::min(bw_, n_ - 1 - j);
        for (int d = 1; d <= top; ++d) {
            y[j + d] += b_(d, j) * x[j];
            y[j] += b_(d, j) * x[j + d];
        }
    }
    return y;
}

Eigen::MatrixXd BandedSym::dense() const {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n_, n_);
    for (int j = 0; j < n_; ++j)
        for (int d = 0; d <= std::min(bw_, n_ - 1 - j); ++d) {
            m(j + d, j) = b_(d, j);
            m(j, j + d) = b_(d, j);
        }
    return m;
}

void BandedSym::shift_diagonal(double s) {
    for (int j = 0; j < n_; ++j) b_(0, j) += s;
}

double BandedSym::gershgorin_lower() const {
    double lo = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_; ++i) {
        double off = 0.0;
        for (int j = std::max(0, i - bw_); j <= std::min(n_ - 1, i + bw_); ++j)
            if (j != i) off += std::abs(get(i, j));
        lo = std::min(lo, get(i, i) - off);
    }
    return lo;
}

double BandedSym::gershgorin_upper() const {
    double hi = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < n_; ++i) {
        double off = 0.0;
        for (int j = std::max(0, i - bw_); j <= std::min(n_ - 1, i + bw_); ++j)
            if (j != i) off += std::abs(get(i, j));
        hi = std::max(hi, get(i, i) + off);
    }
    return hi;
}

BandedLdlt factorize_shifted(const BandedSym& a, double shift) {
    const int n = a.n(), bw = a.bw();
    BandedLdlt f;
    f.n = n;
    f.bw = bw;
    f.l = Eigen::ArrayXXd::Zero(bw + 1, n);
    f.d = Eigen::ArrayXd::Zero(n);
    const double tiny = 1e-300;
    double scale = 0.0;
    for (int j = 0; j < n; ++j) scale = std::max(scale, std::abs(a.get(j, j)) + std::abs(shift));

    for (int j = 0; j < n; ++j) {
        double dj = a.get(j, j) - shift;
        for (int k = std::max(0, j - bw); k < j; ++k) {
            const double ljk = f.l(j - k, k);
            dj -= ljk * ljk * f.d[k];
        }
        if (std::abs(dj) < tiny * std::max(1.0, scale)) return f;  // breakdown
        f.d[j] = dj;
        f.l(0, j) = 1.0;
        const int top = std::min(bw, n - 1 - j);
        for (int di = 1; di <= top; ++di) {
            const int i = j + di;
            double v = a.get(i, j);
            for (int k = std::max(0, i - bw); k < j; ++k) v -= f.l(i - k, k) * f.l(j - k, k) * f.d[k];
            f.l(di, j) = v / dj;
        }
        if (dj < 0.0) ++f.negative_pivots;
    }
    f.ok = true;
    return f;
}

Eigen::VectorXd BandedLdlt::solve(Eigen::VectorXd rhs) const {
    // forward: L y = rhs
    for (int j = 0; j < n; ++j) {
        const int top = std::min(bw, n - 1 - j);
        for (int di = 1; di <= top; ++di) rhs[j + di] -= l(di, j) * rhs[j];
    }
    rhs.array() /= d;
    // backward: L^T x = y
    for (int j = n - 1; j >= 0; --j) {
        const int top = std::min(bw, n - 1 - j);
        for (int di = 1; di <= top; ++di) rhs[j] -= l(di, j) * rhs[j + di];
    }
    return rhs;
}

namespace {

int inertia_below(const BandedSym& a, double sigma) {
    double eps = 0.0;
    for (int attempt = 0; attempt < 8; ++attempt) {
        BandedLdlt f = factorize_shifted(a, sigma + eps);
        if (f.ok) return f.negative_pivots;
        const double scale = std::max(std::abs(sigma), 1.0);
        eps = (eps == 0.0) ? 1e-13 * scale : 4.0 * eps;
    }
    throw std::runtime_error("banded inertia: persistent factorization breakdown");
}

}  // namespace

double eigenvalue_bisect(const BandedSym& a, int k, double tol) {
    double lo = a.gershgorin_lower();
    double hi = a.gershgorin_upper();
    const double scale = std::max({std::abs(lo), std::abs(hi), 1.0});
    while (hi - lo > tol * scale) {
        const double mid = 0.5 * (lo + hi);
        if (inertia_below(a, mid) >= k + 1)
            hi = mid;
        else
            lo = mid;
    }
    return 0.5 * (lo + hi);
}

Eigen::VectorXd eigenvector_near(const BandedSym& a, double lambda) {
    const int n = a.n();
    const double scale = std::max(std::abs(lambda), std::max(std::abs(a.gershgorin_lower()),
                                                             std::abs(a.gershgorin_upper())));
    double delta = 1e-9 * std::max(scale, 1.0);
    std::mt19937_64 rng(0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(rng);
    x.normalize();
    for (int attempt = 0; attempt < 6; ++attempt) {
        BandedLdlt f = factorize_shifted(a, lambda - delta);
        if (!f.ok) {
            delta *= 7.0;
            continue;
        }
        for (int it = 0; it < 6; ++it) {
            Eigen::VectorXd y = f.solve(x);
            const double nrm = y.norm();
            if (!(nrm > 0.0) || !std::isfinite(nrm)) break;
            x = y / nrm;
            const double res = (a.apply(x) - lambda * x).norm();
            if (res < 1e-9 * std::max(1.0, scale)) return x;
        }
        delta *= 7.0;
    }
    return x;  // best effort; caller can check the residual
}

BandedCholesky::BandedCholesky(const BandedSym& a) : n_(a.n()), bw_(a.bw()) {
    l_ = Eigen::ArrayXXd::Zero(bw_ + 1, n_);
    for (int j = 0; j < n_; ++j) {
        double dj = a.get(j, j);
        for (int k = std::max(0, j - bw_); k < j; ++k) dj -= l_(j - k, k) * l_(j - k, k);
        if (!(dj > 0.0)) throw std::runtime_error("banded Cholesky: matrix not SPD");
        const double root = std::sqrt(dj);
        l_(0, j) = root;
        const int top = std::min(bw_, n_ - 1 - j);
        for (int di = 1; di <= top; ++di) {
            const int i = j + di;
            double v = a.get(i, j);
            for (int k = std::max(0, i - bw_); k < j; ++k) v -= l_(i - k, k) * l_(j - k, k);
            l_(di, j) = v / root;
        }
    }
}

Eigen::VectorXd BandedCholesky::solve(Eigen::VectorXd rhs) const {
    for (int j = 0; j < n_; ++j) {
        rhs[j] /= l_(0, j);
        const int top = std::min(bw_, n_ - 1 - j);
        for (int di = 1; di <= top; ++di) rhs[j + di] -= l_(di, j) * rhs[j];
    }
    for (int j = n_ - 1; j >= 0; --j) {
        const int top = std::min(bw_, n_ - 1 - j);
        for (int di = 1; di <= top; ++di) rhs[j] -= l_(di, j) * rhs[j + di];
        rhs[j] /= l_(0, j);
    }
    return rhs;
}

ConstrainedEigResult lowest_constrained(const BandedSym& a,
                                        const std::vector<Eigen::VectorXd>& constraints,
                                        const BandedCholesky& precond, int max_iter, double tol,
                                        std::uint64_t seed) {
    const int n = a.n();
    std::vector<Eigen::VectorXd> c;
    for (const auto& v : constraints) {
        Eigen::VectorXd u = v;
        for (const auto& w : c) u -= w.dot(u) * w;
        if (u.norm() > 1e-12 * std::max(1.0, v.norm())) c.push_back(u.normalized());
    }
    auto project = [&](Eigen::VectorXd& v) {
        for (const auto& w : c) v -= w.dot(v) * w;
    };

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = gauss(rng);
    project(x);
    x.normalize();
    Eigen::VectorXd x_prev = Eigen::VectorXd::Zero(n);

    const double scale =
        std::max({std::abs(a.gershgorin_lower()), std::abs(a.gershgorin_upper()), 1.0});
    ConstrainedEigResult out;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd ax = a.apply(x);
        const double lambda = x.dot(ax);
        Eigen::VectorXd r = ax - lambda * x;
        project(r);
        out.value = lambda;
        out.vector = x;
        out.iterations = it;
        out.residual = r.norm();
        if (out.residual < tol * scale) {
            out.converged = true;
            return out;
        }
        Eigen::VectorXd w = precond.solve(r);
        project(w);

        std::vector<Eigen::VectorXd> basis{x};
        auto push = [&](Eigen::VectorXd v) {
            for (const auto& b : basis) v -= b.dot(v) * b;
            const double nrm = v.norm();
            if (nrm > 1e-10) basis.push_back(v / nrm);
        };
        push(w);
        push(x_prev);

        const int m = static_cast<int>(basis.size());
        Eigen::MatrixXd g(m, m);
        std::vector<Eigen::VectorXd> abasis(m);
        for (int i = 0; i < m; ++i) abasis[i] = a.apply(basis[i]);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j <= i; ++j) g(i, j) = g(j, i) = basis[i].dot(abasis[j]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
        Eigen::VectorXd y = es.eigenvectors().col(0);
        Eigen::VectorXd x_new = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i) x_new += y[i] * basis[i];
        project(x_new);
        x_new.normalize();
        x_prev = x;
        x = x_new;
    }
    return out;
}

}  // namespace gprotor
