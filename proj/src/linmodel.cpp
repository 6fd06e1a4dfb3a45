#include "aggpi/linmodel.hpp"

#include "aggpi/error.hpp"
#include "linmodel_detail.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

namespace aggpi {

namespace {

bool column_is_constant(const Eigen::MatrixXd& values, Eigen::Index j)
{
    if (values.rows() == 0) return true;
    const double lo = values.col(j).minCoeff();
    const double hi = values.col(j).maxCoeff();
    return lo == hi;
}

}  // namespace

// ---------------------------------------------------------------------------
// DesignMatrix

DesignMatrix::DesignMatrix(Eigen::MatrixXd raw, std::vector<std::string> names)
    : values(std::move(raw)), col_names(std::move(names))
{
    const auto p = values.cols();
    if (col_names.empty()) {
        col_names.reserve(static_cast<std::size_t>(p));
        for (Eigen::Index j = 0; j < p; ++j) col_names.push_back("x" + std::to_string(j + 1));
    }
    if (static_cast<Eigen::Index>(col_names.size()) != p)
        throw Error(ErrorCode::DimensionMismatch, "column name count does not match matrix width");
    col_means = Eigen::VectorXd::Zero(p);
    col_scales = Eigen::VectorXd::Ones(p);
    constant_cols.assign(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j) constant_cols[static_cast<std::size_t>(j)] = column_is_constant(values, j);
}

DesignMatrix DesignMatrix::standardize() const
{
    const auto n = rows();
    if (n < 2) throw Error(ErrorCode::InsufficientData, "standardization needs n >= 2");
    DesignMatrix out;
    out.col_names = col_names;
    out.standardized = true;
    const Eigen::MatrixXd raw = raw_values();
    const auto p = raw.cols();
    out.values.resize(n, p);
    out.col_means.resize(p);
    out.col_scales.resize(p);
    out.constant_cols.assign(static_cast<std::size_t>(p), false);
    for (Eigen::Index j = 0; j < p; ++j) {
        const double mu = raw.col(j).mean();
        const Eigen::ArrayXd centered = raw.col(j).array() - mu;
        const double sd = std::sqrt(centered.square().sum() / static_cast<double>(n - 1));
        out.col_means(j) = mu;
        if (column_is_constant(raw, j) || !(sd > 0.0)) {
            out.constant_cols[static_cast<std::size_t>(j)] = true;
            out.col_scales(j) = 1.0;
            out.values.col(j).setZero();
        } else {
            out.col_scales(j) = sd;
            out.values.col(j) = (centered / sd).matrix();
        }
    }
    return out;
}

Eigen::MatrixXd DesignMatrix::raw_values() const
{
    if (!standardized) return values;
    Eigen::MatrixXd raw = values;
    for (Eigen::Index j = 0; j < raw.cols(); ++j) {
        if (constant_cols[static_cast<std::size_t>(j)])
            raw.col(j).setConstant(col_means(j));
        else
            raw.col(j) = raw.col(j) * col_scales(j) + Eigen::VectorXd::Constant(raw.rows(), col_means(j));
    }
    return raw;
}

DesignMatrix DesignMatrix::slice_rows(Eigen::Index first, Eigen::Index count) const
{
    if (first < 0 || count < 0 || first + count > rows())
        throw Error(ErrorCode::DimensionMismatch, "row slice out of range");
    return DesignMatrix(raw_values().middleRows(first, count), col_names);
}

DesignMatrix DesignMatrix::hstack(const DesignMatrix& left, const DesignMatrix& right)
{
    if (left.rows() != right.rows())
        throw Error(ErrorCode::DimensionMismatch, "hstack of designs with different row counts");
    Eigen::MatrixXd joined(left.rows(), left.cols() + right.cols());
    joined << left.raw_values(), right.raw_values();
    std::vector<std::string> names = left.col_names;
    names.insert(names.end(), right.col_names.begin(), right.col_names.end());
    return DesignMatrix(std::move(joined), std::move(names));
}

// ---------------------------------------------------------------------------
// ObservationWeights

ObservationWeights ObservationWeights::normalized(Eigen::VectorXd raw)
{
    if (raw.size() == 0) throw Error(ErrorCode::EmptyInput, "empty weight vector");
    if ((raw.array() < 0.0).any() || !raw.allFinite())
        throw Error(ErrorCode::InvalidArgument, "weights must be finite and nonnegative");
    const double total = raw.sum();
    if (!(total > 0.0)) throw Error(ErrorCode::InvalidArgument, "weights sum to zero");
    ObservationWeights w;
    w.v = raw * (static_cast<double>(raw.size()) / total);
    return w;
}

ObservationWeights ObservationWeights::uniform(Eigen::Index n)
{
    ObservationWeights w;
    w.v = Eigen::VectorXd::Ones(n);
    return w;
}

ObservationWeights ObservationWeights::subset(const std::vector<Eigen::Index>& rows) const
{
    Eigen::VectorXd sub(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) sub(static_cast<Eigen::Index>(i)) = v(rows[i]);
    return normalized(std::move(sub));
}

// ---------------------------------------------------------------------------

std::string_view to_string(Estimator e)
{
    switch (e) {
    case Estimator::OLS: return "ols";
    case Estimator::LAD: return "lad";
    case Estimator::LASSO: return "lasso";
    }
    return "unknown";
}

Estimator parse_estimator(std::string_view name)
{
    std::string lower(name);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "ols") return Estimator::OLS;
    if (lower == "lad") return Estimator::LAD;
    if (lower == "lasso" || lower == "lss") return Estimator::LASSO;
    throw Error(ErrorCode::ConfigInvalid, "unknown estimator '" + std::string(name) + "'");
}

Eigen::VectorXd FitResult::predict(const Eigen::MatrixXd& raw_rows) const
{
    if (raw_rows.cols() != beta.size())
        throw Error(ErrorCode::ColumnMismatch, "prediction rows have " + std::to_string(raw_rows.cols()) +
                                                   " columns, fit has " + std::to_string(beta.size()));
    return (raw_rows * beta).array() + intercept;
}

namespace detail {

std::vector<Eigen::Index> fit_columns(const DesignMatrix& X)
{
    std::vector<Eigen::Index> active;
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const bool flagged = !X.constant_cols.empty() && X.constant_cols[static_cast<std::size_t>(j)];
        if (!flagged && !column_is_constant(X.values, j)) active.push_back(j);
    }
    return active;
}

void check_dimensions(const DesignMatrix& X, const Eigen::VectorXd& y, const std::optional<ObservationWeights>& w)
{
    if (y.size() != X.rows())
        throw Error(ErrorCode::DimensionMismatch, "y has " + std::to_string(y.size()) + " entries, X has " +
                                                      std::to_string(X.rows()) + " rows");
    if (w && w->v.size() != X.rows())
        throw Error(ErrorCode::DimensionMismatch, "weight vector length does not match X");
    if (X.rows() < 2) throw Error(ErrorCode::InsufficientData, "need at least two observations");
}

FitResult finalize(const DesignMatrix& X, const Eigen::VectorXd& y, const std::vector<Eigen::Index>& active,
                   const Eigen::VectorXd& beta_active, double intercept_std, Estimator estimator)
{
    FitResult fit;
    const auto p = X.cols();
    fit.estimator = estimator;
    fit.beta_standardized = Eigen::VectorXd::Zero(p);
    for (std::size_t k = 0; k < active.size(); ++k) fit.beta_standardized(active[k]) = beta_active(static_cast<Eigen::Index>(k));

    fit.beta = fit.beta_standardized;
    fit.intercept = intercept_std;
    if (X.standardized) {
        for (Eigen::Index j = 0; j < p; ++j) {
            fit.beta(j) = fit.beta_standardized(j) / X.col_scales(j);
            fit.intercept -= fit.beta(j) * X.col_means(j);
        }
    }
    fit.residuals = (y - X.values * fit.beta_standardized).array() - intercept_std;
    return fit;
}

Eigen::MatrixXd take_columns(const Eigen::MatrixXd& values, const std::vector<Eigen::Index>& cols)
{
    Eigen::MatrixXd out(values.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = values.col(cols[k]);
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// OLS

FitResult fit_ols(const DesignMatrix& X, const Eigen::VectorXd& y, const std::optional<ObservationWeights>& w)
{
    detail::check_dimensions(X, y, w);
    const auto n = X.rows();
    if (n <= X.cols())
        throw Error(ErrorCode::InsufficientData, "OLS needs n > p (n=" + std::to_string(n) +
                                                     ", p=" + std::to_string(X.cols()) + ")");
    const Eigen::VectorXd v = w ? w->v : Eigen::VectorXd::Ones(n);
    const double vsum = v.sum();
    const auto active = detail::fit_columns(X);
    const Eigen::MatrixXd Xa = detail::take_columns(X.values, active);

    const Eigen::RowVectorXd xmean = (v.transpose() * Xa) / vsum;
    const double ymean = v.dot(y) / vsum;
    const Eigen::ArrayXd sw = v.array().sqrt();
    const Eigen::MatrixXd A = ((Xa.rowwise() - xmean).array().colwise() * sw).matrix();
    const Eigen::VectorXd b = ((y.array() - ymean) * sw).matrix();

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(Xa.cols());
    if (Xa.cols() > 0) {
        const Eigen::MatrixXd gram = A.transpose() * A;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram, Eigen::EigenvaluesOnly);
        const double top = eig.eigenvalues().maxCoeff();
        const double bottom = eig.eigenvalues().minCoeff();
        if (!(top > 0.0) || bottom <= 1e-10 * top)
            throw Error(ErrorCode::RankDeficient, "weighted normal matrix is singular (eigenvalue ratio " +
                                                      std::to_string(top > 0.0 ? bottom / top : 0.0) + ")");
        beta = A.colPivHouseholderQr().solve(b);
    }
    const double intercept = ymean - xmean.dot(beta);
    FitResult fit = detail::finalize(X, y, active, beta, intercept, Estimator::OLS);
    if (w) fit.weights_used = w->v;
    return fit;
}

// ---------------------------------------------------------------------------
// LAD by iteratively reweighted least squares

FitResult fit_lad(const DesignMatrix& X, const Eigen::VectorXd& y, const LadOptions& opts)
{
    detail::check_dimensions(X, y, std::nullopt);
    const auto n = X.rows();
    if (n <= X.cols())
        throw Error(ErrorCode::InsufficientData, "LAD needs n > p (n=" + std::to_string(n) +
                                                     ", p=" + std::to_string(X.cols()) + ")");
    const auto active = detail::fit_columns(X);
    const auto pa = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd A(n, pa + 1);
    A.col(0).setOnes();
    A.rightCols(pa) = detail::take_columns(X.values, active);

    // start from the unweighted least-squares fit
    Eigen::VectorXd theta = A.colPivHouseholderQr().solve(y);
    Eigen::VectorXd resid = y - A * theta;
    double objective = resid.cwiseAbs().sum();

    int iter = 0;
    bool converged = false;
    while (iter < opts.max_iter) {
        ++iter;
        const Eigen::ArrayXd wts = 1.0 / resid.cwiseAbs().array().max(opts.denominator_floor);
        const Eigen::MatrixXd Aw = (A.array().colwise() * wts.sqrt()).matrix();
        const Eigen::MatrixXd gram = Aw.transpose() * Aw;
        const Eigen::VectorXd rhs = A.transpose() * (wts * y.array()).matrix();
        const Eigen::VectorXd next = gram.ldlt().solve(rhs);
        if (!next.allFinite()) throw Error(ErrorCode::NonConvergence, "IRLS produced non-finite coefficients");

        const double step = (next - theta).cwiseAbs().maxCoeff();
        const double scale = 1.0 + next.cwiseAbs().maxCoeff();
        theta = next;
        resid = y - A * theta;
        const double next_objective = resid.cwiseAbs().sum();
        const double decrease = objective - next_objective;
        objective = next_objective;
        if (step <= 1e-9 * scale || std::abs(decrease) <= opts.tol * std::max(objective, 1e-300)) {
            converged = true;
            break;
        }
    }
    if (!converged)
        throw Error(ErrorCode::NonConvergence, "IRLS did not converge in " + std::to_string(opts.max_iter) +
                                                   " iterations (ill-conditioned design?)");

    FitResult fit = detail::finalize(X, y, active, theta.tail(pa), theta(0), Estimator::LAD);
    fit.iterations = iter;
    return fit;
}

double soft_threshold(double z, double g)
{
    if (g < 0.0) throw Error(ErrorCode::InvalidArgument, "soft threshold needs g >= 0");
    if (z > g) return z - g;
    if (z < -g) return z + g;
    return 0.0;
}

}  // namespace aggpi
