#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace gprotor {

/// Symmetric banded matrix, lower storage: entry(d, j) = A(j+d, j).
class BandedSym {
  public:
    BandedSym() : BandedSym(1, 0) {}
    BandedSym(int n, int bw) : n_(n), bw_(bw), b_(Eigen::ArrayXXd::Zero(bw + 1, n)) {}

    int n() const { return n_; }
    int bw() const { return bw_; }

    double& at(int i, int j);  // requires j <= i <= j + bw
    double get(int i, int j) const;
    void add_sym(int i, int j, double v);

    Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd dense() const;
    void shift_diagonal(double s);

    double gershgorin_lower() const;
    double gershgorin_upper() const;

    const Eigen::ArrayXXd& raw() const { return b_; }

  private:
    int n_, bw_;
    Eigen::ArrayXXd b_;
};

/// LDL^T of (A - shift I) without pivoting. `ok` is false on pivot
/// breakdown, in which case the caller should nudge the shift.
struct BandedLdlt {
    bool ok = false;
    int negative_pivots = 0;
    int n = 0, bw = 0;
    Eigen::ArrayXXd l;  // unit lower factor, banded layout
    Eigen::ArrayXd d;

    Eigen::VectorXd solve(Eigen::VectorXd rhs) const;
};

BandedLdlt factorize_shifted(const BandedSym& a, double shift);

/// k-th smallest eigenvalue (k = 0 is the lowest) by inertia bisection.
double eigenvalue_bisect(const BandedSym& a, int k, double tol = 1e-11);

/// Eigenvector by shifted inverse iteration near an isolated eigenvalue.
Eigen::VectorXd eigenvector_near(const BandedSym& a, double lambda);

/// Cholesky of an SPD banded matrix, used as preconditioner.
class BandedCholesky {
  public:
    explicit BandedCholesky(const BandedSym& a);
    Eigen::VectorXd solve(Eigen::VectorXd rhs) const;

  private:
    int n_, bw_;
    Eigen::ArrayXXd l_;
};

struct ConstrainedEigResult {
    double value = 0.0;
    Eigen::VectorXd vector;
    int iterations = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Lowest Rayleigh quotient of A on the orthogonal complement of the
/// constraint vectors, by preconditioned subspace iteration
/// (LOBPCG-style basis [x, preconditioned residual, previous x]).
ConstrainedEigResult lowest_constrained(const BandedSym& a,
                                        const std::vector<Eigen::VectorXd>& constraints,
                                        const BandedCholesky& precond, int max_iter = 800,
                                        double tol = 1e-11, std::uint64_t seed = 1234);

}  // namespace gprotor
