#include "aggpi/error.hpp"
#include "aggpi/linmodel.hpp"
#include "aggpi/rng.hpp"
#include "linmodel_detail.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace aggpi {

namespace {

constexpr double kFlatColumn = 1e-14;

/// Weighted-centered problem data on the active columns. W sums to one, so
/// the smooth part of the objective is sum_i W_i r_i^2 = (1/n) sum_i v_i r_i^2.
struct CdProblem {
    Eigen::MatrixXd xc;
    Eigen::MatrixXd xw;
    Eigen::VectorXd yc;
    Eigen::VectorXd weight;
    Eigen::VectorXd curvature;
    Eigen::RowVectorXd xmean;
    double ymean = 0.0;
    double total_ss = 0.0;
    // xw' xc and xw' yc, built on first use by face_step
    mutable Eigen::MatrixXd gram;
    mutable Eigen::VectorXd xwy;
    mutable bool has_gram = false;

    void ensure_gram() const
    {
        if (has_gram) return;
        gram.noalias() = xw.transpose() * xc;
        xwy.noalias() = xw.transpose() * yc;
        has_gram = true;
    }
};

CdProblem make_problem(const Eigen::MatrixXd& xa, const Eigen::VectorXd& y, const Eigen::VectorXd& v)
{
    CdProblem p;
    p.weight = v / v.sum();
    p.xmean = p.weight.transpose() * xa;
    p.ymean = p.weight.dot(y);
    p.xc = xa.rowwise() - p.xmean;
    p.yc = y.array() - p.ymean;
    p.xw = (p.xc.array().colwise() * p.weight.array()).matrix();
    p.curvature = (p.xw.array() * p.xc.array()).colwise().sum().transpose();
    p.total_ss = (p.weight.array() * p.yc.array().square()).sum();
    return p;
}

double objective(const CdProblem& p, const Eigen::VectorXd& beta, const Eigen::VectorXd& r, double lambda)
{
    return (p.weight.array() * r.array().square()).sum() + lambda * beta.cwiseAbs().sum();
}

/// Active-face step. Solves for the minimizer of the objective on the face
/// where the coefficients in `act` keep their current signs and all others
/// are zero. If that point flips a sign, moves along the segment toward it up
/// to the first zero crossing, drops that coefficient and tries again. The
/// objective is a convex quadratic along the segment, so it never increases;
/// it is still checked. Returns whether anything moved.
bool face_step(const CdProblem& p, double lambda, std::vector<Eigen::Index> act, Eigen::VectorXd& beta,
               Eigen::VectorXd& r)
{
    const auto n = p.xc.rows();
    bool moved = false;
    for (int round = 0; round < 8; ++round) {
        const auto k = static_cast<Eigen::Index>(act.size());
        if (k == 0 || k >= n) return moved;
        p.ensure_gram();
        Eigen::MatrixXd gram(k, k);
        Eigen::VectorXd rhs(k);
        Eigen::VectorXd cur(k);
        for (Eigen::Index i = 0; i < k; ++i) {
            const auto j = act[static_cast<std::size_t>(i)];
            cur(i) = beta(j);
            rhs(i) = p.xwy(j) - 0.5 * lambda * (cur(i) > 0.0 ? 1.0 : -1.0);
            for (Eigen::Index l = 0; l <= i; ++l) gram(i, l) = p.gram(j, act[static_cast<std::size_t>(l)]);
        }
        const Eigen::LLT<Eigen::MatrixXd> llt(gram);
        if (llt.info() != Eigen::Success) return moved;
        const Eigen::VectorXd target = llt.solve(rhs);
        if (!target.allFinite()) return moved;

        double t = 1.0;
        Eigen::Index blocking = -1;
        for (Eigen::Index i = 0; i < k; ++i) {
            if (target(i) == 0.0 || (target(i) > 0.0) != (cur(i) > 0.0)) {
                const double ti = cur(i) / (cur(i) - target(i));
                if (ti < t) {
                    t = ti;
                    blocking = i;
                }
            }
        }
        Eigen::VectorXd next = cur + t * (target - cur);
        if (blocking >= 0) next(blocking) = 0.0;
        Eigen::VectorXd beta_new = beta;
        for (Eigen::Index i = 0; i < k; ++i) beta_new(act[static_cast<std::size_t>(i)]) = next(i);
        Eigen::VectorXd r_new = p.yc;
        for (Eigen::Index i = 0; i < k; ++i)
            if (next(i) != 0.0) r_new.noalias() -= next(i) * p.xc.col(act[static_cast<std::size_t>(i)]);
        if (objective(p, beta_new, r_new, lambda) > objective(p, beta, r, lambda)) return moved;
        beta = std::move(beta_new);
        r = std::move(r_new);
        moved = true;
        if (blocking < 0) return true;
        act.erase(act.begin() + blocking);
    }
    return moved;
}

/// Cyclic coordinate descent from the given start; r must equal yc - xc*beta.
/// Alternates full sweeps with sweeps over the current nonzero set. When the
/// nonzero sweeps stall, an exact solve on the current face is tried; the
/// convergence test is always a coordinate sweep with max change < tol.
int coordinate_descent(const CdProblem& p, double lambda, Eigen::VectorXd& beta, Eigen::VectorXd& r,
                       const LassoOptions& opts, std::vector<double>* trace)
{
    const double half = 0.5 * lambda;
    const auto width = beta.size();

    auto update = [&](Eigen::Index j) {
        const double curv = p.curvature(j);
        if (curv <= kFlatColumn) return 0.0;
        const double old = beta(j);
        const double z = p.xw.col(j).dot(r) + curv * old;
        const double next = soft_threshold(z, half) / curv;
        if (next == old) return 0.0;
        r.noalias() -= (next - old) * p.xc.col(j);
        beta(j) = next;
        return std::abs(next - old);
    };

    auto give_up = [&] {
        throw Error(ErrorCode::NonConvergence,
                    "coordinate descent did not converge in " + std::to_string(opts.max_sweeps) + " sweeps");
    };

    int sweeps = 0;
    int face_interval = 10;
    std::vector<Eigen::Index> nonzero;
    while (true) {
        double max_change = 0.0;
        for (Eigen::Index j = 0; j < width; ++j) max_change = std::max(max_change, update(j));
        ++sweeps;
        if (trace) trace->push_back(objective(p, beta, r, lambda));
        if (max_change < opts.tol) return sweeps;

        int since_face = 0;
        while (true) {
            if (sweeps >= opts.max_sweeps) give_up();
            nonzero.clear();
            for (Eigen::Index j = 0; j < width; ++j)
                if (beta(j) != 0.0) nonzero.push_back(j);
            if (++since_face >= face_interval) {
                since_face = 0;
                if (face_step(p, lambda, nonzero, beta, r))
                    face_interval = 10;
                else
                    face_interval = std::min(2 * face_interval, 640);
            }
            double change = 0.0;
            for (auto j : nonzero) change = std::max(change, update(j));
            ++sweeps;
            if (trace) trace->push_back(objective(p, beta, r, lambda));
            if (change < opts.tol) break;
        }
        if (sweeps >= opts.max_sweeps) give_up();
    }
}

void check_grid(const std::vector<double>& lambdas)
{
    if (lambdas.empty()) throw Error(ErrorCode::EmptyGrid, "lambda grid is empty");
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        if (!(lambdas[k] >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda values must be nonnegative");
        if (k > 0 && !(lambdas[k] < lambdas[k - 1]))
            throw Error(ErrorCode::InvalidArgument, "lambda grid must be strictly decreasing");
    }
}

struct PathOutput {
    Eigen::MatrixXd betas;
    std::vector<double> intercepts;
    std::size_t fitted = 0;
};

/// Path over the grid on prepared data. Stops at the first grid point that
/// fails to converge or after the fit reaches `stop_r2`.
PathOutput run_path(const CdProblem& p, const std::vector<double>& lambdas, const LassoOptions& opts, double stop_r2)
{
    const auto width = p.xc.cols();
    PathOutput out;
    out.betas = Eigen::MatrixXd::Zero(width, static_cast<Eigen::Index>(lambdas.size()));
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(width);
    Eigen::VectorXd r = p.yc;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        try {
            coordinate_descent(p, lambdas[k], beta, r, opts, nullptr);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NonConvergence) throw;
            break;
        }
        out.betas.col(static_cast<Eigen::Index>(k)) = beta;
        out.intercepts.push_back(p.ymean - p.xmean.dot(beta));
        out.fitted = k + 1;
        if (p.total_ss > 0.0) {
            const double rss = (p.weight.array() * r.array().square()).sum();
            if (1.0 - rss / p.total_ss >= stop_r2) break;
        }
    }
    return out;
}

Eigen::VectorXd weights_or_ones(const std::optional<ObservationWeights>& w, Eigen::Index n)
{
    return w ? w->v : Eigen::VectorXd::Ones(n);
}

void require_standardized(const DesignMatrix& X)
{
    if (!X.standardized)
        throw Error(ErrorCode::InvalidArgument, "LASSO requires a standardized design (call standardize())");
}

}  // namespace

FitResult fit_lasso(const DesignMatrix& X, const Eigen::VectorXd& y, double lambda,
                    const std::optional<ObservationWeights>& w, const LassoOptions& opts)
{
    detail::check_dimensions(X, y, w);
    require_standardized(X);
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidArgument, "lambda must be nonnegative");
    const auto active = detail::fit_columns(X);
    const CdProblem p = make_problem(detail::take_columns(X.values, active), y, weights_or_ones(w, X.rows()));

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p.xc.cols());
    Eigen::VectorXd r = p.yc;
    std::vector<double> trace;
    const int sweeps = coordinate_descent(p, lambda, beta, r, opts, opts.record_objective ? &trace : nullptr);

    FitResult fit = detail::finalize(X, y, active, beta, p.ymean - p.xmean.dot(beta), Estimator::LASSO);
    fit.lambda = lambda;
    fit.iterations = sweeps;
    fit.objective_trace = std::move(trace);
    if (w) fit.weights_used = w->v;
    return fit;
}

double lambda_max(const DesignMatrix& X, const Eigen::VectorXd& y, const std::optional<ObservationWeights>& w)
{
    detail::check_dimensions(X, y, w);
    const auto active = detail::fit_columns(X);
    if (active.empty()) return 0.0;
    const CdProblem p = make_problem(detail::take_columns(X.values, active), y, weights_or_ones(w, X.rows()));
    return 2.0 * (p.xw.transpose() * p.yc).cwiseAbs().maxCoeff();
}

std::vector<double> default_lambda_grid(const DesignMatrix& X, const Eigen::VectorXd& y,
                                        const std::optional<ObservationWeights>& w, int count, double ratio)
{
    if (count < 1) throw Error(ErrorCode::EmptyGrid, "lambda grid needs at least one point");
    const double top = lambda_max(X, y, w);
    if (!(top > 0.0) || count == 1) return {top};
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double step = std::log(ratio) / static_cast<double>(count - 1);
    for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = top * std::exp(step * k);
    grid.front() = top;
    return grid;
}

LassoPath lasso_path(const DesignMatrix& X, const Eigen::VectorXd& y, const std::vector<double>& lambdas,
                     const std::optional<ObservationWeights>& w, const LassoOptions& opts)
{
    detail::check_dimensions(X, y, w);
    require_standardized(X);
    check_grid(lambdas);
    const auto active = detail::fit_columns(X);
    const CdProblem p = make_problem(detail::take_columns(X.values, active), y, weights_or_ones(w, X.rows()));
    PathOutput raw = run_path(p, lambdas, opts, 0.999);

    LassoPath path;
    path.lambdas = lambdas;
    path.fitted = raw.fitted;
    path.intercepts = raw.intercepts;
    path.betas = Eigen::MatrixXd::Zero(X.cols(), static_cast<Eigen::Index>(lambdas.size()));
    for (std::size_t k = 0; k < active.size(); ++k) path.betas.row(active[k]) = raw.betas.row(static_cast<Eigen::Index>(k));
    return path;
}

CvResult cv_lasso(const DesignMatrix& X, const Eigen::VectorXd& y, int k_folds,
                  const std::vector<double>& lambda_grid, const std::optional<ObservationWeights>& w,
                  std::uint64_t rng_seed, FoldScheme scheme, const LassoOptions& opts)
{
    detail::check_dimensions(X, y, w);
    require_standardized(X);
    check_grid(lambda_grid);
    const auto n = X.rows();
    if (k_folds < 2 || k_folds > n)
        throw Error(ErrorCode::InvalidArgument, "k_folds must be in [2, n]");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    if (scheme == FoldScheme::Shuffled) {
        Rng rng(rng_seed);
        for (std::size_t i = order.size() - 1; i > 0; --i) std::swap(order[i], order[rng.below(i + 1)]);
    }

    const auto active = detail::fit_columns(X);
    const Eigen::MatrixXd xa = detail::take_columns(X.values, active);
    const Eigen::VectorXd v = weights_or_ones(w, n);
    const auto grid_size = lambda_grid.size();
    std::vector<double> sse(grid_size, 0.0);
    std::vector<bool> reached(grid_size, true);

    for (int fold = 0; fold < k_folds; ++fold) {
        const auto lo = static_cast<std::size_t>(n * fold / k_folds);
        const auto hi = static_cast<std::size_t>(n * (fold + 1) / k_folds);
        std::vector<Eigen::Index> train;
        std::vector<Eigen::Index> held;
        for (std::size_t i = 0; i < order.size(); ++i) (i >= lo && i < hi ? held : train).push_back(order[i]);

        Eigen::MatrixXd x_train(static_cast<Eigen::Index>(train.size()), xa.cols());
        Eigen::VectorXd y_train(static_cast<Eigen::Index>(train.size()));
        Eigen::VectorXd v_train(static_cast<Eigen::Index>(train.size()));
        for (std::size_t i = 0; i < train.size(); ++i) {
            x_train.row(static_cast<Eigen::Index>(i)) = xa.row(train[i]);
            y_train(static_cast<Eigen::Index>(i)) = y(train[i]);
            v_train(static_cast<Eigen::Index>(i)) = v(train[i]);
        }
        if (!(v_train.sum() > 0.0)) throw Error(ErrorCode::InsufficientData, "a training fold has zero total weight");
        const CdProblem p = make_problem(x_train, y_train, v_train);
        const PathOutput path = run_path(p, lambda_grid, opts, 0.999);

        for (std::size_t k = 0; k < grid_size; ++k) {
            if (k >= path.fitted) {
                reached[k] = false;
                continue;
            }
            const Eigen::VectorXd beta = path.betas.col(static_cast<Eigen::Index>(k));
            for (auto i : held) {
                const double pred = path.intercepts[k] + xa.row(i).dot(beta);
                sse[k] += v(i) * (y(i) - pred) * (y(i) - pred);
            }
        }
    }

    CvResult out;
    out.cv_errors.resize(grid_size);
    const double vsum = v.sum();
    for (std::size_t k = 0; k < grid_size; ++k)
        out.cv_errors[k] = reached[k] ? sse[k] / vsum : std::numeric_limits<double>::infinity();

    std::size_t best = 0;
    for (std::size_t k = 1; k < grid_size; ++k)
        if (out.cv_errors[k] < out.cv_errors[best]) best = k;
    out.lambda_star = lambda_grid[best];
    return out;
}

FitResult fit_lasso_cv(const DesignMatrix& X, const Eigen::VectorXd& y, int k_folds,
                       const std::optional<ObservationWeights>& w, std::uint64_t rng_seed, const LassoOptions& opts)
{
    const auto grid = default_lambda_grid(X, y, w);
    const CvResult cv = cv_lasso(X, y, k_folds, grid, w, rng_seed, FoldScheme::Contiguous, opts);
    const auto star = static_cast<std::size_t>(std::find(grid.begin(), grid.end(), cv.lambda_star) - grid.begin());
    const std::vector<double> prefix(grid.begin(), grid.begin() + static_cast<std::ptrdiff_t>(star) + 1);

    const auto active = detail::fit_columns(X);
    const CdProblem p = make_problem(detail::take_columns(X.values, active), y, weights_or_ones(w, X.rows()));
    const PathOutput path = run_path(p, prefix, opts, std::numeric_limits<double>::infinity());
    if (path.fitted != prefix.size())
        throw Error(ErrorCode::NonConvergence, "full-data LASSO fit did not converge at the selected lambda");

    const Eigen::VectorXd beta = path.betas.col(static_cast<Eigen::Index>(star));
    FitResult fit = detail::finalize(X, y, active, beta, path.intercepts.back(), Estimator::LASSO);
    fit.lambda = cv.lambda_star;
    if (w) fit.weights_used = w->v;
    return fit;
}

}  // namespace aggpi
