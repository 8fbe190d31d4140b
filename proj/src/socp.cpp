#include "relayplan/socp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace relayplan
{

namespace
{

constexpr double kStaticReg = 1e-8;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---------------------------------------------------------------------------
// Standard conic form: minimize c'x  s.t.  A x = b,  G x + s = h,  s in K,
// K = nonneg orthant (dim l) x SOC(dim q_0) x ... Conversion flips the
// maximized objective and rotates quadratics into cones.
// ---------------------------------------------------------------------------
struct StdForm
{
    int n = 0;
    Eigen::VectorXd c;
    Eigen::SparseMatrix<double> a;
    Eigen::VectorXd b;
    Eigen::SparseMatrix<double> g;
    Eigen::VectorXd h;
    int l = 0;
    std::vector<int> soc_dims;

    int m() const { return static_cast<int>(h.size()); }
    int p() const { return static_cast<int>(b.size()); }
    int degree() const { return l + static_cast<int>(soc_dims.size()); }
};

// Low-rank factor of a PSD matrix restricted to its support: Q = L L' with L
// of size n x k. Eigenvalues below the PSD tolerance are dropped.
Eigen::MatrixXd psd_factor(const Eigen::SparseMatrix<double>& q, int n, const char* where)
{
    std::vector<int> support;
    {
        std::vector<bool> used(static_cast<size_t>(n), false);
        for (int col = 0; col < q.outerSize(); ++col)
        {
            for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it)
            {
                if (it.value() != 0.0)
                {
                    used[static_cast<size_t>(it.row())] = true;
                    used[static_cast<size_t>(it.col())] = true;
                }
            }
        }
        for (int i = 0; i < n; ++i)
        {
            if (used[static_cast<size_t>(i)])
            {
                support.push_back(i);
            }
        }
    }
    const int k = static_cast<int>(support.size());
    Eigen::MatrixXd dense = Eigen::MatrixXd::Zero(k, k);
    for (int col = 0; col < q.outerSize(); ++col)
    {
        for (Eigen::SparseMatrix<double>::InnerIterator it(q, col); it; ++it)
        {
            const auto ri = std::lower_bound(support.begin(), support.end(), it.row());
            const auto ci = std::lower_bound(support.begin(), support.end(), it.col());
            dense(ri - support.begin(), ci - support.begin()) = it.value();
        }
    }
    dense = 0.5 * (dense + dense.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(dense);
    const double max_ev = k > 0 ? std::max(1.0, es.eigenvalues().maxCoeff()) : 1.0;
    if (k > 0 && es.eigenvalues().minCoeff() < -1e-8 * max_ev)
    {
        throw std::invalid_argument(std::string(where) + ": quadratic matrix is not PSD");
    }
    std::vector<int> kept;
    for (int i = 0; i < k; ++i)
    {
        if (es.eigenvalues()[i] > 1e-12 * max_ev)
        {
            kept.push_back(i);
        }
    }
    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(n, static_cast<int>(kept.size()));
    for (size_t j = 0; j < kept.size(); ++j)
    {
        const double s = std::sqrt(es.eigenvalues()[kept[j]]);
        for (int i = 0; i < k; ++i)
        {
            factor(support[static_cast<size_t>(i)], static_cast<int>(j)) =
                s * es.eigenvectors()(i, kept[j]);
        }
    }
    return factor;
}

StdForm to_standard_form(const ConeProgram& p)
{
    StdForm sf;
    sf.n = p.num_vars;
    sf.c = p.objective.size() == 0 ? Eigen::VectorXd::Zero(sf.n).eval()
                                   : (-p.objective).eval();
    sf.a = p.eq_a;
    sf.b = p.eq_b;
    if (sf.a.rows() == 0)
    {
        sf.a.resize(0, sf.n);
        sf.b.resize(0);
    }

    sf.l = static_cast<int>(p.ineq_b.size());
    int m = sf.l;
    for (const auto& soc : p.socs)
    {
        const int dim = 1 + static_cast<int>(soc.b.size());
        sf.soc_dims.push_back(dim);
        m += dim;
    }
    std::vector<Eigen::MatrixXd> quad_factors;
    for (const auto& quad : p.quads)
    {
        quad_factors.push_back(psd_factor(quad.q_mat, sf.n, "quad constraint"));
        const int dim = 2 + static_cast<int>(quad_factors.back().cols());
        sf.soc_dims.push_back(dim);
        m += dim;
    }

    sf.h.resize(m);
    std::vector<Eigen::Triplet<double>> trip;
    int row = 0;
    for (int i = 0; i < sf.l; ++i, ++row)
    {
        sf.h[row] = p.ineq_b[i];
    }
    // ineq_a rows, inserted column-wise
    for (int col = 0; col < p.ineq_a.outerSize(); ++col)
    {
        for (Eigen::SparseMatrix<double>::InnerIterator it(p.ineq_a, col); it; ++it)
        {
            trip.emplace_back(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
        }
    }
    for (const auto& soc : p.socs)
    {
        // s = (c'x + d, A x + b) in the cone  =>  G = (-c'; -A), h = (d; b)
        sf.h[row] = soc.d;
        for (Eigen::SparseVector<double>::InnerIterator it(soc.c); it; ++it)
        {
            trip.emplace_back(row, static_cast<int>(it.index()), -it.value());
        }
        ++row;
        for (int col = 0; col < soc.a.outerSize(); ++col)
        {
            for (Eigen::SparseMatrix<double>::InnerIterator it(soc.a, col); it; ++it)
            {
                trip.emplace_back(row + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  -it.value());
            }
        }
        for (int i = 0; i < soc.b.size(); ++i)
        {
            sf.h[row + i] = soc.b[i];
        }
        row += static_cast<int>(soc.b.size());
    }
    for (size_t qi = 0; qi < p.quads.size(); ++qi)
    {
        // x'Qx + q'x <= r with Q = LL' rotates into
        // || (2 L'x, 1 - r + q'x) || <= 1 + r - q'x
        const auto& quad = p.quads[qi];
        const Eigen::MatrixXd& fac = quad_factors[qi];
        const int k = static_cast<int>(fac.cols());
        sf.h[row] = 1.0 + quad.r;
        for (Eigen::SparseVector<double>::InnerIterator it(quad.q_vec); it; ++it)
        {
            trip.emplace_back(row, static_cast<int>(it.index()), it.value());
        }
        for (int j = 0; j < k; ++j)
        {
            for (int i = 0; i < sf.n; ++i)
            {
                if (fac(i, j) != 0.0)
                {
                    trip.emplace_back(row + 1 + j, i, -2.0 * fac(i, j));
                }
            }
            sf.h[row + 1 + j] = 0.0;
        }
        sf.h[row + 1 + k] = 1.0 - quad.r;
        for (Eigen::SparseVector<double>::InnerIterator it(quad.q_vec); it; ++it)
        {
            trip.emplace_back(row + 1 + k, static_cast<int>(it.index()), -it.value());
        }
        row += k + 2;
    }
    sf.g.resize(m, sf.n);
    sf.g.setFromTriplets(trip.begin(), trip.end());
    return sf;
}

// ---------------------------------------------------------------------------
// Cone arithmetic over the composite vector layout (orthant, then SOC blocks).
// ---------------------------------------------------------------------------

Eigen::VectorXd cone_identity(const StdForm& sf)
{
    Eigen::VectorXd e = Eigen::VectorXd::Zero(sf.m());
    e.head(sf.l).setOnes();
    int off = sf.l;
    for (const int d : sf.soc_dims)
    {
        e[off] = 1.0;
        off += d;
    }
    return e;
}

/// Smallest margin to the cone boundary (negative outside the cone).
double cone_margin(const StdForm& sf, const Eigen::VectorXd& v)
{
    double margin = kInf;
    for (int i = 0; i < sf.l; ++i)
    {
        margin = std::min(margin, v[i]);
    }
    int off = sf.l;
    for (const int d : sf.soc_dims)
    {
        margin = std::min(margin, v[off] - v.segment(off + 1, d - 1).norm());
        off += d;
    }
    return margin;
}

/// Jordan-algebra product u o v.
Eigen::VectorXd cone_product(const StdForm& sf, const Eigen::VectorXd& u, const Eigen::VectorXd& v)
{
    Eigen::VectorXd out(sf.m());
    out.head(sf.l) = u.head(sf.l).cwiseProduct(v.head(sf.l));
    int off = sf.l;
    for (const int d : sf.soc_dims)
    {
        out[off] = u.segment(off, d).dot(v.segment(off, d));
        out.segment(off + 1, d - 1) =
            u[off] * v.segment(off + 1, d - 1) + v[off] * u.segment(off + 1, d - 1);
        off += d;
    }
    return out;
}

/// Jordan-algebra division lambda \ t (solve lambda o u = t).
Eigen::VectorXd cone_divide(const StdForm& sf, const Eigen::VectorXd& lambda,
                            const Eigen::VectorXd& t)
{
    Eigen::VectorXd out(sf.m());
    out.head(sf.l) = t.head(sf.l).cwiseQuotient(lambda.head(sf.l));
    int off = sf.l;
    for (const int d : sf.soc_dims)
    {
        const double l0 = lambda[off];
        const auto l1 = lambda.segment(off + 1, d - 1);
        const double det = l0 * l0 - l1.squaredNorm();
        const double u0 = (l0 * t[off] - l1.dot(t.segment(off + 1, d - 1))) / det;
        out[off] = u0;
        out.segment(off + 1, d - 1) = (t.segment(off + 1, d - 1) - u0 * l1) / l0;
        off += d;
    }
    return out;
}

/// Largest step alpha with v + alpha dv staying in the cone (v interior).
double max_step(const StdForm& sf, const Eigen::VectorXd& v, const Eigen::VectorXd& dv)
{
    double alpha = kInf;
    for (int i = 0; i < sf.l; ++i)
    {
        if (dv[i] < 0.0)
        {
            alpha = std::min(alpha, -v[i] / dv[i]);
        }
    }
    int off = sf.l;
    for (const int d : sf.soc_dims)
    {
        const double v0 = v[off];
        const double dv0 = dv[off];
        const auto v1 = v.segment(off + 1, d - 1);
        const auto dv1 = dv.segment(off + 1, d - 1);
        // First positive root of (v0+a dv0)^2 - ||v1 + a dv1||^2 = 0.
        const double qa = dv0 * dv0 - dv1.squaredNorm();
        const double qb = v0 * dv0 - v1.dot(dv1);
        const double qc = v0 * v0 - v1.squaredNorm();
        double root = kInf;
        if (std::abs(qa) < 1e-14 * std::max(1.0, std::abs(qb)))
        {
            if (qb < 0.0)
            {
                root = -qc / (2.0 * qb);
            }
        }
        else
        {
            const double disc = qb * qb - qa * qc;
            if (disc >= 0.0)
            {
                const double sq = std::sqrt(disc);
                const double r1 = (-qb - sq) / qa;
                const double r2 = (-qb + sq) / qa;
                const double lo = std::min(r1, r2);
                const double hi = std::max(r1, r2);
                if (lo > 1e-14)
                {
                    root = lo;
                }
                else if (hi > 1e-14 && qa < 0.0)
                {
                    root = hi;
                }
            }
        }
        alpha = std::min(alpha, root);
        off += d;
    }
    return alpha;
}

// ---------------------------------------------------------------------------
// Nesterov-Todd scaling. W is symmetric; lambda = W z = W^{-1} s.
// ---------------------------------------------------------------------------
struct NtScaling
{
    Eigen::VectorXd w_orth; // sqrt(s/z) per orthant coordinate
    struct SocBlock
    {
        double eta;
        Eigen::VectorXd wbar; // hyperbolic unit vector, wbar0^2 - ||wbar1||^2 = 1
    };
    std::vector<SocBlock> socs;

    bool compute(const StdForm& sf, const Eigen::VectorXd& s, const Eigen::VectorXd& z)
    {
        w_orth.resize(sf.l);
        for (int i = 0; i < sf.l; ++i)
        {
            if (s[i] <= 0.0 || z[i] <= 0.0)
            {
                return false;
            }
            w_orth[i] = std::sqrt(s[i] / z[i]);
        }
        socs.clear();
        int off = sf.l;
        for (const int d : sf.soc_dims)
        {
            const double sres = s[off] * s[off] - s.segment(off + 1, d - 1).squaredNorm();
            const double zres = z[off] * z[off] - z.segment(off + 1, d - 1).squaredNorm();
            if (sres <= 0.0 || zres <= 0.0 || s[off] <= 0.0 || z[off] <= 0.0)
            {
                return false;
            }
            Eigen::VectorXd sb = s.segment(off, d) / std::sqrt(sres);
            Eigen::VectorXd zb = z.segment(off, d) / std::sqrt(zres);
            const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
            Eigen::VectorXd wb(d);
            wb[0] = (sb[0] + zb[0]) / (2.0 * gamma);
            wb.tail(d - 1) = (sb.tail(d - 1) - zb.tail(d - 1)) / (2.0 * gamma);
            socs.push_back({std::pow(sres / zres, 0.25), std::move(wb)});
            off += d;
        }
        return true;
    }

    static NtScaling identity(const StdForm& sf)
    {
        NtScaling nt;
        nt.w_orth = Eigen::VectorXd::Ones(sf.l);
        for (const int d : sf.soc_dims)
        {
            Eigen::VectorXd wb = Eigen::VectorXd::Zero(d);
            wb[0] = 1.0;
            nt.socs.push_back({1.0, std::move(wb)});
        }
        return nt;
    }

    Eigen::VectorXd apply(const StdForm& sf, const Eigen::VectorXd& v, bool inverse) const
    {
        Eigen::VectorXd out(sf.m());
        for (int i = 0; i < sf.l; ++i)
        {
            out[i] = inverse ? v[i] / w_orth[i] : v[i] * w_orth[i];
        }
        int off = sf.l;
        for (size_t k = 0; k < socs.size(); ++k)
        {
            const int d = sf.soc_dims[k];
            const double eta = inverse ? 1.0 / socs[k].eta : socs[k].eta;
            const double w0 = socs[k].wbar[0];
            Eigen::VectorXd w1 = socs[k].wbar.tail(d - 1);
            if (inverse)
            {
                w1 = -w1;
            }
            const double v0 = v[off];
            const auto v1 = v.segment(off + 1, d - 1);
            const double w1v1 = w1.dot(v1);
            out[off] = eta * (w0 * v0 + w1v1);
            out.segment(off + 1, d - 1) = eta * (v0 * w1 + v1 + (w1v1 / (1.0 + w0)) * w1);
            off += d;
        }
        return out;
    }
};

// ---------------------------------------------------------------------------
// Quasidefinite KKT system with static regularization and iterative
// refinement against the unregularized operator.
// ---------------------------------------------------------------------------
class KktSolver
{
public:
    explicit KktSolver(const StdForm& sf) : sf_(sf), dim_(sf.n + sf.p() + sf.m()) {}

    bool factor(const NtScaling& nt)
    {
        // Escalate the static regularization when the factorization breaks
        // down (ill-conditioned scalings near convergence); the iterative
        // refinement in solve() corrects against the unregularized operator
        // either way.
        for (double reg = kStaticReg; reg <= 1e-2; reg *= 1e2)
        {
            if (factor_with_reg(nt, reg))
            {
                return true;
            }
        }
        return false;
    }

    bool factor_with_reg(const NtScaling& nt, const double reg)
    {
        nt_ = &nt;
        std::vector<Eigen::Triplet<double>> trip;
        const int n = sf_.n;
        const int p = sf_.p();
        for (int i = 0; i < n; ++i)
        {
            trip.emplace_back(i, i, reg);
        }
        for (int col = 0; col < sf_.a.outerSize(); ++col)
        {
            for (Eigen::SparseMatrix<double>::InnerIterator it(sf_.a, col); it; ++it)
            {
                trip.emplace_back(n + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value());
                trip.emplace_back(static_cast<int>(it.col()), n + static_cast<int>(it.row()),
                                  it.value());
            }
        }
        for (int i = 0; i < p; ++i)
        {
            trip.emplace_back(n + i, n + i, -reg);
        }
        for (int col = 0; col < sf_.g.outerSize(); ++col)
        {
            for (Eigen::SparseMatrix<double>::InnerIterator it(sf_.g, col); it; ++it)
            {
                trip.emplace_back(n + p + static_cast<int>(it.row()), static_cast<int>(it.col()),
                                  it.value());
                trip.emplace_back(static_cast<int>(it.col()), n + p + static_cast<int>(it.row()),
                                  it.value());
            }
        }
        // -W'W block: diagonal on the orthant, eta^2 (2 wbar wbar' - J) per SOC.
        for (int i = 0; i < sf_.l; ++i)
        {
            trip.emplace_back(n + p + i, n + p + i,
                              -nt.w_orth[i] * nt.w_orth[i] - reg);
        }
        int off = sf_.l;
        for (size_t k = 0; k < nt.socs.size(); ++k)
        {
            const int d = sf_.soc_dims[k];
            const double e2 = nt.socs[k].eta * nt.socs[k].eta;
            const Eigen::VectorXd& wb = nt.socs[k].wbar;
            for (int i = 0; i < d; ++i)
            {
                for (int j = 0; j < d; ++j)
                {
                    double val = 2.0 * e2 * wb[i] * wb[j];
                    if (i == j)
                    {
                        val -= e2 * (i == 0 ? 1.0 : -1.0);
                    }
                    val = -val;
                    if (i == j)
                    {
                        val -= reg;
                    }
                    trip.emplace_back(n + p + off + i, n + p + off + j, val);
                }
            }
            off += d;
        }
        Eigen::SparseMatrix<double> kkt(dim_, dim_);
        kkt.setFromTriplets(trip.begin(), trip.end());
        if (!analyzed_)
        {
            ldlt_.analyzePattern(kkt);
            analyzed_ = true;
        }
        ldlt_.factorize(kkt);
        return ldlt_.info() == Eigen::Success;
    }

    // Solves the unregularized KKT system by refining the regularized solve.
    Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const
    {
        Eigen::VectorXd u = ldlt_.solve(rhs);
        for (int pass = 0; pass < 3; ++pass)
        {
            const Eigen::VectorXd resid = rhs - apply_unregularized(u);
            u += ldlt_.solve(resid);
        }
        return u;
    }

private:
    Eigen::VectorXd apply_unregularized(const Eigen::VectorXd& u) const
    {
        const int n = sf_.n;
        const int p = sf_.p();
        const auto ux = u.head(n);
        const auto uy = u.segment(n, p);
        const auto uz = u.tail(sf_.m());
        Eigen::VectorXd out(dim_);
        out.head(n) = sf_.a.transpose() * uy + sf_.g.transpose() * uz;
        out.segment(n, p) = sf_.a * ux;
        out.tail(sf_.m()) = sf_.g * ux - nt_->apply(sf_, nt_->apply(sf_, uz, false), false);
        return out;
    }

    const StdForm& sf_;
    const NtScaling* nt_ = nullptr;
    int dim_;
    bool analyzed_ = false;
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower> ldlt_;
};

} // namespace

// ---------------------------------------------------------------------------
// Public API
// ---------------------------------------------------------------------------

void ConeProgram::validate() const
{
    auto fail = [](const std::string& what) { throw std::invalid_argument("ConeProgram: " + what); };
    if (num_vars <= 0) fail("num_vars must be positive");
    if (objective.size() != 0 && objective.size() != num_vars) fail("objective dimension mismatch");
    if (eq_a.rows() != eq_b.size()) fail("equality row count mismatch");
    if (eq_a.rows() > 0 && eq_a.cols() != num_vars) fail("equality column count mismatch");
    if (ineq_a.rows() != ineq_b.size()) fail("inequality row count mismatch");
    if (ineq_a.rows() > 0 && ineq_a.cols() != num_vars) fail("inequality column count mismatch");
    for (size_t i = 0; i < socs.size(); ++i)
    {
        const auto& s = socs[i];
        if (s.a.rows() != s.b.size() || (s.a.rows() > 0 && s.a.cols() != num_vars) ||
            s.c.size() != num_vars)
        {
            fail("soc constraint " + std::to_string(i) + " dimension mismatch");
        }
    }
    for (size_t i = 0; i < quads.size(); ++i)
    {
        const auto& q = quads[i];
        if (q.q_mat.rows() != num_vars || q.q_mat.cols() != num_vars || q.q_vec.size() != num_vars)
        {
            fail("quad constraint " + std::to_string(i) + " dimension mismatch");
        }
        psd_factor(q.q_mat, num_vars, ("quad constraint " + std::to_string(i)).c_str());
    }
}

double max_violation(const ConeProgram& p, const Eigen::VectorXd& x)
{
    double worst = 0.0;
    auto track = [&worst](double violation, double scale)
    { worst = std::max(worst, violation / std::max(1.0, scale)); };

    const Eigen::VectorXd eq_resid = p.eq_a * x - p.eq_b;
    for (int i = 0; i < eq_resid.size(); ++i)
    {
        track(std::abs(eq_resid[i]), std::abs(p.eq_b[i]));
    }
    const Eigen::VectorXd ineq_lhs = p.ineq_a * x;
    for (int i = 0; i < ineq_lhs.size(); ++i)
    {
        track(ineq_lhs[i] - p.ineq_b[i], std::abs(p.ineq_b[i]));
    }
    for (const auto& soc : p.socs)
    {
        const double lhs = (soc.a * x + soc.b).norm();
        const double rhs = soc.c.dot(x) + soc.d;
        track(lhs - rhs, std::abs(rhs));
    }
    for (const auto& quad : p.quads)
    {
        const double lhs = x.dot(quad.q_mat * x) + quad.q_vec.dot(x);
        track(lhs - quad.r, std::abs(quad.r));
    }
    return worst;
}

Solution solve(const ConeProgram& prog, double tol, int max_iters)
{
    const StdForm sf = to_standard_form(prog);
    const int n = sf.n;
    const int p = sf.p();
    const int m = sf.m();
    const double nu = std::max(sf.degree(), 1);

    Solution sol;
    sol.x = Eigen::VectorXd::Zero(n);

    KktSolver kkt(sf);
    const NtScaling ident = NtScaling::identity(sf);
    if (!kkt.factor(ident))
    {
        sol.diagnostic = "initial KKT factorization failed";
        return sol;
    }

    // Initial point: cone-shifted solutions of the two W = I systems.
    Eigen::VectorXd x(n), y(p), s(m), z(m);
    double tau = 1.0;
    double kappa = 1.0;
    {
        Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n + p + m);
        rhs.segment(n, p) = sf.b;
        rhs.tail(m) = sf.h;
        const Eigen::VectorXd u1 = kkt.solve(rhs);
        x = u1.head(n);
        s = -u1.tail(m);
        rhs.setZero();
        rhs.head(n) = -sf.c;
        const Eigen::VectorXd u2 = kkt.solve(rhs);
        y = u2.segment(n, p);
        z = u2.tail(m);
        const Eigen::VectorXd e = cone_identity(sf);
        const double ms = cone_margin(sf, s);
        if (ms <= 0.0)
        {
            s += (1.0 - ms) * e;
        }
        const double mz = cone_margin(sf, z);
        if (mz <= 0.0)
        {
            z += (1.0 - mz) * e;
        }
    }

    const double bnorm = std::max(1.0, sf.b.norm());
    const double hnorm = std::max(1.0, sf.h.norm());
    const double cnorm = std::max(1.0, sf.c.norm());
    NtScaling nt;

    for (int iter = 0; iter <= max_iters; ++iter)
    {
        const Eigen::VectorXd rx = sf.a.transpose() * y + sf.g.transpose() * z + sf.c * tau;
        const Eigen::VectorXd ry = sf.a * x - sf.b * tau;
        const Eigen::VectorXd rz = sf.g * x + s - sf.h * tau;
        const double rtau = sf.c.dot(x) + sf.b.dot(y) + sf.h.dot(z) + kappa;
        sol.infeasibility_log.push_back(std::sqrt(rx.squaredNorm() + ry.squaredNorm() +
                                                  rz.squaredNorm() + rtau * rtau));
        sol.iterations = iter;

        const double pres = std::max(ry.norm() / bnorm, rz.norm() / hnorm) / tau;
        const double dres = rx.norm() / cnorm / tau;
        const double pcost = sf.c.dot(x) / tau;
        const double gap = (s.dot(z) + tau * kappa) / (tau * tau);
        const double relgap = gap / std::max(1.0, std::abs(pcost));

        if (pres <= tol && dres <= tol && relgap <= tol)
        {
            sol.status = SolveStatus::optimal;
            sol.x = x / tau;
            sol.objective = prog.objective.size() == 0 ? 0.0 : prog.objective.dot(sol.x);
            sol.max_violation = max_violation(prog, sol.x);
            return sol;
        }
        if (tau <= tol * 1e-2 * std::max(1.0, kappa))
        {
            // The embedding converged to a certificate ray.
            if (sf.b.dot(y) + sf.h.dot(z) < -1e-12)
            {
                sol.status = SolveStatus::infeasible;
                sol.diagnostic = "primal infeasibility certificate (b'y + h'z < 0)";
            }
            else
            {
                sol.status = SolveStatus::numerical_failure;
                sol.diagnostic = sf.c.dot(x) < -1e-12 ? "problem unbounded (dual infeasibility ray)"
                                                      : "degenerate certificate ray";
            }
            return sol;
        }
        if (iter == max_iters)
        {
            break;
        }

        auto bail = [&](const char* why)
        {
            // Numerical breakdown: hand back the current (strictly feasible
            // in the embedding) iterate and let the caller judge it by the
            // independently measured violation.
            sol.status = SolveStatus::max_iter;
            sol.x = x / tau;
            sol.objective = prog.objective.size() == 0 ? 0.0 : prog.objective.dot(sol.x);
            sol.max_violation = max_violation(prog, sol.x);
            sol.diagnostic = why;
            return sol;
        };

        if (!nt.compute(sf, s, z))
        {
            return bail("iterate left the cone interior");
        }
        const Eigen::VectorXd lambda = nt.apply(sf, z, false);
        if (!kkt.factor(nt))
        {
            return bail("KKT factorization failed");
        }

        Eigen::VectorXd rhs(n + p + m);
        rhs.head(n) = -sf.c;
        rhs.segment(n, p) = sf.b;
        rhs.tail(m) = sf.h;
        const Eigen::VectorXd v = kkt.solve(rhs);
        const double denom = sf.c.dot(v.head(n)) + sf.b.dot(v.segment(n, p)) +
                             sf.h.dot(v.tail(m)) - kappa / tau;

        const double mu = (s.dot(z) + tau * kappa) / (nu + 1.0);

        auto direction = [&](const Eigen::VectorXd& dx, const Eigen::VectorXd& dy,
                             const Eigen::VectorXd& dz_in, double dtau_rhs,
                             const Eigen::VectorXd& ds_in, double dkappa_rhs,
                             Eigen::VectorXd& out_dx, Eigen::VectorXd& out_dy,
                             Eigen::VectorXd& out_dz, Eigen::VectorXd& out_ds, double& out_dtau,
                             double& out_dkappa)
        {
            const Eigen::VectorXd bs = cone_divide(sf, lambda, ds_in);
            rhs.head(n) = dx;
            rhs.segment(n, p) = dy;
            rhs.tail(m) = dz_in - nt.apply(sf, bs, false);
            const Eigen::VectorXd u = kkt.solve(rhs);
            out_dtau = (dtau_rhs - dkappa_rhs / tau - sf.c.dot(u.head(n)) -
                        sf.b.dot(u.segment(n, p)) - sf.h.dot(u.tail(m))) /
                       denom;
            out_dx = u.head(n) + out_dtau * v.head(n);
            out_dy = u.segment(n, p) + out_dtau * v.segment(n, p);
            out_dz = u.tail(m) + out_dtau * v.tail(m);
            out_ds = nt.apply(sf, (bs - nt.apply(sf, out_dz, false)).eval(), false);
            out_dkappa = (dkappa_rhs - kappa * out_dtau) / tau;
        };

        auto step_limit = [&](const Eigen::VectorXd& ds, const Eigen::VectorXd& dz, double dtau,
                              double dkappa)
        {
            double a = std::min(max_step(sf, s, ds), max_step(sf, z, dz));
            if (dtau < 0.0)
            {
                a = std::min(a, -tau / dtau);
            }
            if (dkappa < 0.0)
            {
                a = std::min(a, -kappa / dkappa);
            }
            return a;
        };

        // Affine (predictor) direction.
        Eigen::VectorXd dxa, dya, dza, dsa;
        double dtaua = 0.0;
        double dkappaa = 0.0;
        direction(-rx, -ry, -rz, -rtau, (-cone_product(sf, lambda, lambda)).eval(), -tau * kappa,
                  dxa, dya, dza, dsa, dtaua, dkappaa);
        const double alpha_aff = std::min(1.0, step_limit(dsa, dza, dtaua, dkappaa));

        const double sigma = std::min(1.0, std::max(0.0, std::pow(1.0 - alpha_aff, 3)));

        // Combined (corrector) direction with the Mehrotra second-order term.
        Eigen::VectorXd ds_rhs = -cone_product(sf, lambda, lambda) -
                                 cone_product(sf, nt.apply(sf, dsa, true), nt.apply(sf, dza, false));
        ds_rhs += sigma * mu * cone_identity(sf);
        const double dkappa_rhs = -tau * kappa - dtaua * dkappaa + sigma * mu;
        const double rscale = 1.0 - sigma;
        Eigen::VectorXd dx, dy, dz, ds;
        double dtau = 0.0;
        double dkappa = 0.0;
        direction((-rscale * rx).eval(), (-rscale * ry).eval(), (-rscale * rz).eval(),
                  -rscale * rtau, ds_rhs, dkappa_rhs, dx, dy, dz, ds, dtau, dkappa);

        double alpha = std::min(1.0, 0.99 * step_limit(ds, dz, dtau, dkappa));
        if (!std::isfinite(alpha) || alpha <= 0.0)
        {
            return bail("step computation failed");
        }
        // max_step computes the exact boundary step analytically, but the SOC
        // quadratic roots can overestimate it in floating point; back the
        // step off until the new iterate is strictly interior.
        bool stepped = false;
        for (int back = 0; back < 40 && !stepped; ++back)
        {
            const Eigen::VectorXd s_new = s + alpha * ds;
            const Eigen::VectorXd z_new = z + alpha * dz;
            const double tau_new = tau + alpha * dtau;
            const double kappa_new = kappa + alpha * dkappa;
            if (cone_margin(sf, s_new) > 0.0 && cone_margin(sf, z_new) > 0.0 && tau_new > 0.0 &&
                kappa_new > 0.0)
            {
                x += alpha * dx;
                y += alpha * dy;
                s = s_new;
                z = z_new;
                tau = tau_new;
                kappa = kappa_new;
                stepped = true;
            }
            else
            {
                alpha *= 0.5;
            }
        }
        if (!stepped)
        {
            return bail("no interior step found");
        }
    }

    sol.status = SolveStatus::max_iter;
    sol.x = x / tau;
    sol.objective = prog.objective.size() == 0 ? 0.0 : prog.objective.dot(sol.x);
    sol.max_violation = max_violation(prog, sol.x);
    sol.diagnostic = "iteration limit reached";
    return sol;
}

std::string dump(const ConeProgram& p)
{
    std::ostringstream os;
    auto term = [](std::ostringstream& o, double coef, int idx, bool& first)
    {
        if (coef == 0.0)
        {
            return;
        }
        if (!first && coef >= 0.0)
        {
            o << " + ";
        }
        else if (!first)
        {
            o << " - ";
            coef = -coef;
        }
        o << coef << " x" << idx;
        first = false;
    };
    auto row_of = [&term](const Eigen::SparseMatrix<double>& mat, int row)
    {
        std::ostringstream o;
        bool first = true;
        for (int col = 0; col < mat.cols(); ++col)
        {
            const double v = mat.coeff(row, col);
            term(o, v, col, first);
        }
        if (first)
        {
            o << "0";
        }
        return o.str();
    };

    os << "maximize ";
    {
        bool first = true;
        for (int i = 0; i < p.objective.size(); ++i)
        {
            term(os, p.objective[i], i, first);
        }
        if (first)
        {
            os << "0";
        }
        os << "\n";
    }
    for (int i = 0; i < p.eq_b.size(); ++i)
    {
        os << "eq: " << row_of(p.eq_a, i) << " = " << p.eq_b[i] << "\n";
    }
    for (int i = 0; i < p.ineq_b.size(); ++i)
    {
        os << "ineq: " << row_of(p.ineq_a, i) << " <= " << p.ineq_b[i] << "\n";
    }
    for (const auto& soc : p.socs)
    {
        os << "soc: ||";
        for (int r = 0; r < soc.a.rows(); ++r)
        {
            os << (r ? "; " : "") << row_of(soc.a, r) << " + " << soc.b[r];
        }
        os << "|| <= ";
        bool first = true;
        std::ostringstream rhs;
        for (Eigen::SparseVector<double>::InnerIterator it(soc.c); it; ++it)
        {
            term(rhs, it.value(), static_cast<int>(it.index()), first);
        }
        if (first)
        {
            rhs << "0";
        }
        os << rhs.str() << " + " << soc.d << "\n";
    }
    for (const auto& quad : p.quads)
    {
        os << "quad: x'Qx";
        bool first = false;
        std::ostringstream lin;
        for (Eigen::SparseVector<double>::InnerIterator it(quad.q_vec); it; ++it)
        {
            term(lin, it.value(), static_cast<int>(it.index()), first);
        }
        os << lin.str() << " <= " << quad.r << " (nnz(Q)=" << quad.q_mat.nonZeros() << ")\n";
    }
    return os.str();
}

} // namespace relayplan
