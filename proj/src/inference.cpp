#include "panelkit/inference.hpp"

#include "panelkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

namespace panelkit {

namespace {

double f_upper_tail(double x, int dof1, int dof2) {
    const double d1 = static_cast<double>(dof1);
    const double d2 = static_cast<double>(dof2);
    return incomplete_beta(0.5 * d2, 0.5 * d1, d2 / (d2 + d1 * x));
}

double chi2_upper_tail(double x, int dof) {
    return incomplete_gamma_upper(0.5 * dof, 0.5 * x);
}

std::vector<int> coefficient_indices(const FitResult& fit,
                                     const std::vector<std::string>& names) {
    std::vector<int> out;
    out.reserve(names.size());
    for (const auto& name : names) {
        const int idx = fit.coefficient_index(name);
        if (idx < 0) {
            throw std::invalid_argument("unknown coefficient '" + name + "'");
        }
        out.push_back(idx);
    }
    return out;
}

void check_covariance_shape(const FitResult& fit, const Matrix& covariance) {
    if (covariance.rows() != fit.coefficients.size() ||
        covariance.cols() != fit.coefficients.size()) {
        std::ostringstream msg;
        msg << "covariance is " << covariance.rows() << "x" << covariance.cols() << " but the fit has "
            << fit.coefficients.size() << " coefficients";
        throw std::invalid_argument(msg.str());
    }
}

std::string join(const std::vector<std::string>& names) {
    std::string out;
    for (size_t i = 0; i < names.size(); ++i) {
        if (i) out += ", ";
        out += names[i];
    }
    return out;
}

}  // namespace

std::string to_string(Distribution d) {
    switch (d) {
        case Distribution::student_t: return "t";
        case Distribution::f: return "F";
        case Distribution::chi_square: return "chi-square";
    }
    return "t";
}

Matrix classical_covariance(const FitResult& fit) {
    if (fit.dof_residual <= 0) {
        throw std::invalid_argument("fit has no residual degrees of freedom");
    }
    return (fit.rss / fit.dof_residual) * fit.xtx_inverse;
}

Matrix cluster_sandwich(const Matrix& X, const Vector& residuals, const Matrix& xtx_inverse,
                        const std::vector<int>& cluster, double small_sample_factor) {
    if (static_cast<size_t>(X.rows()) != cluster.size() || X.rows() != residuals.size()) {
        throw std::invalid_argument("cluster assignment does not match the design rows");
    }
    std::map<int, Vector> scores;
    for (Eigen::Index r = 0; r < X.rows(); ++r) {
        auto [it, inserted] = scores.try_emplace(cluster[r], Vector::Zero(X.cols()));
        it->second += X.row(r).transpose() * residuals[r];
    }
    if (scores.size() < 2) {
        throw std::invalid_argument("cluster-robust covariance needs at least two clusters");
    }
    Matrix meat = Matrix::Zero(X.cols(), X.cols());
    for (const auto& [id, s] : scores) {
        meat += s * s.transpose();
    }
    Matrix v = small_sample_factor * xtx_inverse * meat * xtx_inverse;
    return (0.5 * (v + v.transpose())).eval();
}

Matrix cluster_robust_covariance(const FitResult& fit, const std::vector<int>& cluster,
                                 bool small_sample) {
    const Matrix& X = fit.design.X;
    if (static_cast<size_t>(X.rows()) != cluster.size()) {
        throw std::invalid_argument("cluster assignment does not match the design rows");
    }
    // Scores use the residuals of the system actually solved (demeaned or
    // quasi-demeaned designs carry their own response in design.y).
    const Vector residuals = fit.design.y - X * fit.coefficients;
    double factor = 1.0;
    if (small_sample) {
        std::map<int, int> counts;
        for (int id : cluster) ++counts[id];
        const double G = static_cast<double>(counts.size());
        const double n = static_cast<double>(X.rows());
        const double p = static_cast<double>(fit.n_params);
        if (G < 2) {
            throw std::invalid_argument("cluster-robust covariance needs at least two clusters");
        }
        if (n <= p) {
            throw std::invalid_argument("no residual degrees of freedom for the sandwich factor");
        }
        factor = (G / (G - 1.0)) * ((n - 1.0) / (n - p));
    }
    return cluster_sandwich(X, residuals, fit.xtx_inverse, cluster, factor);
}

TestResult t_test(const FitResult& fit, const std::string& coefficient,
                  const Matrix& covariance, int dof) {
    check_covariance_shape(fit, covariance);
    if (dof < 1) {
        throw std::invalid_argument("t test needs a positive degrees of freedom");
    }
    const int idx = fit.coefficient_index(coefficient);
    if (idx < 0) {
        throw std::invalid_argument("unknown coefficient '" + coefficient + "'");
    }
    double variance = covariance(idx, idx);
    if (variance < 0.0) {
        if (variance < -1e-12 * std::max(1.0, covariance.cwiseAbs().maxCoeff())) {
            throw std::runtime_error("negative variance for coefficient '" + coefficient + "'");
        }
        variance = 0.0;
    }
    const double se = std::sqrt(variance);
    if (se <= 0.0) {
        throw std::runtime_error("zero standard error for coefficient '" + coefficient + "'");
    }

    TestResult out;
    out.name = coefficient;
    out.statistic = fit.coefficients[idx] / se;
    out.distribution = Distribution::student_t;
    out.dof1 = dof;
    out.p_value = t_two_sided_p(out.statistic, dof);
    return out;
}

TestResult joint_wald_test(const FitResult& fit, const std::vector<std::string>& coefficients,
                           const Matrix& covariance, WaldForm form, int denominator_dof) {
    check_covariance_shape(fit, covariance);
    if (coefficients.empty()) {
        throw std::invalid_argument("joint test needs at least one coefficient");
    }
    const std::vector<int> idx = coefficient_indices(fit, coefficients);
    const int q = static_cast<int>(idx.size());

    Vector b(q);
    Matrix V(q, q);
    for (int i = 0; i < q; ++i) {
        b[i] = fit.coefficients[idx[i]];
        for (int j = 0; j < q; ++j) {
            V(i, j) = covariance(idx[i], idx[j]);
        }
    }
    V = (0.5 * (V + V.transpose())).eval();

    Eigen::FullPivLU<Matrix> lu(V);
    lu.setThreshold(1e-10);
    if (lu.rank() < q) {
        std::ostringstream msg;
        msg << "covariance of the tested coefficients is singular (rank " << lu.rank() << " of "
            << q << ")";
        throw std::runtime_error(msg.str());
    }
    const double wald = std::max(0.0, b.dot(lu.solve(b)));

    TestResult out;
    out.name = "joint";
    out.detail = "H0: jointly zero: " + join(coefficients);
    if (form == WaldForm::chi_square) {
        out.statistic = wald;
        out.distribution = Distribution::chi_square;
        out.dof1 = q;
        out.p_value = chi2_upper_tail(wald, q);
        return out;
    }
    if (denominator_dof < 1) {
        throw std::invalid_argument(
            "F form needs a positive denominator dof (clusters - 1 under cluster covariance)");
    }
    out.statistic = wald / q;
    out.distribution = Distribution::f;
    out.dof1 = q;
    out.dof2 = denominator_dof;
    out.p_value = f_upper_tail(out.statistic, q, denominator_dof);
    return out;
}

TestResult hausman_test(const FitResult& fe, const FitResult& re) {
    if (fe.spec.dependent != re.spec.dependent) {
        throw std::invalid_argument("fits model different dependent variables");
    }

    std::vector<std::string> shared;
    for (const auto& name : fe.coefficient_names) {
        if (name == "const") continue;
        if (name.rfind("DR_", 0) == 0 || name.rfind("DT_", 0) == 0) continue;
        if (re.coefficient_index(name) >= 0) shared.push_back(name);
    }
    if (shared.empty()) {
        throw std::invalid_argument("no common slope coefficients between the fits");
    }
    const int q = static_cast<int>(shared.size());

    Vector d(q);
    Matrix dV(q, q);
    for (int i = 0; i < q; ++i) {
        const int fi = fe.coefficient_index(shared[i]);
        const int ri = re.coefficient_index(shared[i]);
        d[i] = fe.coefficients[fi] - re.coefficients[ri];
        for (int j = 0; j < q; ++j) {
            const int fj = fe.coefficient_index(shared[j]);
            const int rj = re.coefficient_index(shared[j]);
            dV(i, j) = fe.covariance(fi, fj) - re.covariance(ri, rj);
        }
    }
    dV = (0.5 * (dV + dV.transpose())).eval();

    Eigen::SelfAdjointEigenSolver<Matrix> eigen(dV);
    if (eigen.info() != Eigen::Success) {
        throw std::runtime_error("eigendecomposition of the variance difference failed");
    }
    const Vector& values = eigen.eigenvalues();
    const double tol = 1e-10 * values.cwiseAbs().maxCoeff();

    double statistic = 0.0;
    int retained = 0;
    bool indefinite = false;
    for (int i = 0; i < q; ++i) {
        if (values[i] > tol && values[i] > 0.0) {
            const double projection = eigen.eigenvectors().col(i).dot(d);
            statistic += projection * projection / values[i];
            ++retained;
        } else if (values[i] < -tol) {
            indefinite = true;
        }
    }

    TestResult out;
    out.name = "hausman";
    out.distribution = Distribution::chi_square;
    out.detail = "comparing: " + join(shared);
    if (indefinite || retained < q) {
        std::ostringstream note;
        note << "; variance difference not positive definite, generalized inverse on rank "
             << retained << " of " << q;
        out.detail += note.str();
    }
    out.dof1 = retained;
    if (retained == 0) {
        out.statistic = 0.0;
        out.p_value = 1.0;
        out.detail += "; no positive eigenvalues, statistic degenerate";
        return out;
    }
    out.statistic = statistic;
    out.p_value = chi2_upper_tail(statistic, retained);
    return out;
}

}  // namespace panelkit
