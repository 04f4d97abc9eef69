#include "sw/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "sw/error.hpp"

namespace sw {

namespace {

constexpr double kPoleTol = 1e-12;
constexpr double kMaxCondition = 1e12;

int shared_indices(ReplicaPair x, ReplicaPair y) {
    int c = 0;
    if (x.first == y.first || x.first == y.second) ++c;
    if (x.second == y.first || x.second == y.second) ++c;
    return c;
}

}  // namespace

double mu1(double a1, double a2, double a3, double lambda) { return lambda * (a1 - 2.0 * a2 + a3); }
double mu2(double a1, double a2, double a3, double lambda) {
    return lambda * (a1 - 3.0 * a2 + 2.0 * a3);
}

CovarianceResult covariance_closed_form(double a1, double a2, double a3, double lambda) {
    CovarianceResult res;
    res.mu1 = mu1(a1, a2, a3, lambda);
    res.mu2 = mu2(a1, a2, a3, lambda);
    const double d1 = 1.0 - res.mu1;
    const double d2 = 1.0 - res.mu2;
    if (std::abs(d1) < kPoleTol || std::abs(d2) < kPoleTol)
        throw Error(ErrorCode::Critical, "1 - lambda M is singular (mu1=" + std::to_string(res.mu1) +
                                             ", mu2=" + std::to_string(res.mu2) + ")");
    if (lambda == 0.0) {
        res.A = a1;
        res.B = a2;
        res.C = a3;
        return res;
    }
    const double shared = (-3.0 + 3.0 * lambda * a1 - 2.0 * lambda * a2) / (d1 * d1);
    res.A = (-1.0 + 2.0 / d2 + 2.0 / d1 + shared) / lambda;
    res.B = (shared + 3.0 / d2) / lambda;
    res.C = (4.0 * lambda * a2 * a2 + (1.0 - lambda * a1 - 5.0 * lambda * a2) * a3 +
             2.0 * lambda * a3 * a3) /
            (d1 * d1 * d2);
    return res;
}

CovarianceResult covariance_closed_form_or_nan(double a1, double a2, double a3, double lambda) {
    try {
        return covariance_closed_form(a1, a2, a3, lambda);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Critical) throw;
        CovarianceResult res;
        res.mu1 = mu1(a1, a2, a3, lambda);
        res.mu2 = mu2(a1, a2, a3, lambda);
        res.A = res.B = res.C = std::numeric_limits<double>::quiet_NaN();
        res.invertible = false;
        return res;
    }
}

Eigen::Matrix3d build_M(double a1, double a2, double a3) {
    Eigen::Matrix3d m;
    m << a1, -2.0 * a2, a3,
         a2, a1 - a2 - 2.0 * a3, 3.0 * a3 - 2.0 * a2,
         a3, 4.0 * a2 - 6.0 * a3, a1 - 6.0 * a2 + 6.0 * a3;
    return m;
}

double overlap_coefficient(ReplicaPair rs, ReplicaPair ab, double a1, double a2, double a3) {
    switch (shared_indices(rs, ab)) {
        case 2: return a1;
        case 1: return a2;
        default: return a3;
    }
}

template <class T>
using MatrixT = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;

template <class T>
void fill_cavity(const CavitySystem& sys, CavityConvention convention, MatrixT<T>& Amat,
                 MatrixT<T>& Bmat) {
    const int n = sys.n;
    const T a1 = sys.a1, a2 = sys.a2, a3 = sys.a3;
    auto a = [&](ReplicaPair rs, ReplicaPair ab) -> T {
        switch (shared_indices(rs, ab)) {
            case 2: return a1;
            case 1: return a2;
            default: return a3;
        }
    };
    const auto rows = static_cast<Eigen::Index>(sys.rows.size());
    const auto cols = static_cast<Eigen::Index>(sys.cols.size());

    Amat.resize(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) Amat(i, j) = a(sys.rows[i], sys.cols[j]);

    const T nd = n;
    Bmat.resize(rows, rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const ReplicaPair rs = sys.rows[i];
        for (Eigen::Index j = 0; j < rows; ++j) {
            const auto [ca, cb] = sys.rows[j];
            T v = 0;
            if (rs.second <= n) {
                // rows (r,r') with r' <= n
                if (cb <= n) v = a(rs, {ca, cb});
                else if (cb == n + 1) v = -(nd - 1) * a(rs, {ca, n + 1});
                else v = nd * (nd - 1) / 2 * a(rs, {n + 1, n + 2});
            } else if (rs.second == n + 1) {
                if (cb <= n) v = a(rs, {ca, cb});
                else if (cb == n + 1) v = a(rs, {ca, n + 1}) - nd * a(rs, {ca, n + 2});
                else v = nd * (nd + 1) / 2 * a(rs, {n + 2, n + 3}) - nd * a(rs, {n + 1, n + 2});
            } else {
                // row (n+1,n+2)
                if (cb <= n) v = a(rs, {ca, cb});
                else if (cb == n + 1) v = 2 * a(rs, {ca, n + 1}) - (nd + 1) * a(rs, {ca, n + 3});
                else {
                    v = (nd + 1) * (nd + 2) / 2 * a(rs, {n + 3, n + 4}) - 2 * (nd + 1) * a(rs, {n + 1, n + 3});
                    if (convention == CavityConvention::derived) v += a(rs, {n + 1, n + 2});
                }
            }
            Bmat(i, j) = v;
        }
    }
}

CavitySystem build_cavity_system(int n, double a1, double a2, double a3, CavityConvention convention) {
    if (n < 2) throw Error(ErrorCode::BadDimension, "cavity system needs n >= 2");
    CavitySystem sys;
    sys.n = n;
    sys.a1 = a1;
    sys.a2 = a2;
    sys.a3 = a3;
    sys.convention = convention;
    for (int r = 1; r <= n; ++r)
        for (int s = r + 1; s <= n; ++s) sys.cols.emplace_back(r, s);
    sys.rows = sys.cols;
    for (int r = 1; r <= n; ++r) sys.rows.emplace_back(r, n + 1);
    sys.rows.emplace_back(n + 1, n + 2);
    fill_cavity<double>(sys, convention, sys.Amat, sys.Bmat);
    return sys;
}

namespace {

// The (r,n+1) and (n+1,n+2) blocks carry O(n^2) weights with cancellations, so the
// condition number reaches ~1e6 at n = 6 near mu1 = 0.95. Entries are rebuilt and
// factored in long double.
Eigen::MatrixXd solve_cavity(const CavitySystem& sys, double lambda, double& condition) {
    MatrixT<long double> A, B;
    fill_cavity<long double>(sys, sys.convention, A, B);
    const auto k = B.rows();
    const MatrixT<long double> lhs = MatrixT<long double>::Identity(k, k) - static_cast<long double>(lambda) * B;
    Eigen::PartialPivLU<MatrixT<long double>> lu(lhs);
    const double rc = static_cast<double>(lu.rcond());
    if (!(rc > 1.0 / kMaxCondition))
        throw Error(ErrorCode::Singular, "1 - lambda B condition estimate " + std::to_string(1.0 / rc));
    condition = 1.0 / rc;
    return lu.solve(A).cast<double>();
}

}  // namespace

Eigen::MatrixXd cavity_solution(const CavitySystem& sys, double lambda) {
    double cond = 0.0;
    return solve_cavity(sys, lambda, cond);
}

CovarianceResult solve_covariance_general_n(const CavitySystem& sys, double lambda) {
    double cond = 0.0;
    const Eigen::MatrixXd sol = solve_cavity(sys, lambda, cond);

    const int n = sys.n;
    const auto row_of = [&](ReplicaPair p) {
        const auto it = std::find(sys.rows.begin(), sys.rows.end(), p);
        return static_cast<Eigen::Index>(it - sys.rows.begin());
    };

    CovarianceResult res;
    res.n = n;
    res.condition = cond;
    res.mu1 = mu1(sys.a1, sys.a2, sys.a3, lambda);
    res.mu2 = mu2(sys.a1, sys.a2, sys.a3, lambda);
    res.A = sol(row_of({1, 2}), 0);
    res.B = sol(row_of({1, n + 1}), 0);
    res.C = sol(row_of({n + 1, n + 2}), 0);

    const double ref[3] = {res.C, res.B, res.A};
    double spread = 0.0;
    for (Eigen::Index i = 0; i < sol.rows(); ++i)
        for (Eigen::Index j = 0; j < sol.cols(); ++j)
            spread = std::max(spread,
                              std::abs(sol(i, j) - ref[shared_indices(sys.rows[i], sys.cols[j])]));
    res.symmetry_residual = spread;
    return res;
}

TrajectoryPoint constant_overlap_trajectory(const Prior& p, double lambda, double lambda_prime,
                                            const GaussHermiteRule& rule, const SolverOptions& opt) {
    if (!(lambda_prime >= 0.0 && lambda_prime <= lambda))
        throw Error(ErrorCode::BadDimension, "lambda' must lie in [0, lambda]");
    const double qbar = solve_fixed_point(p, lambda, 0.0, rule, opt).qbar;
    const double h0 = lambda * qbar;
    TrajectoryPoint pt;
    pt.lambda_prime = lambda_prime;
    pt.h = std::max(0.0, h0 - lambda_prime * F(p, h0, rule));
    if (lambda_prime == 0.0) pt.q = F(p, pt.h, rule);
    else pt.q = solve_fixed_point(p, lambda_prime, pt.h, rule, opt).qbar;
    return pt;
}

}  // namespace sw
