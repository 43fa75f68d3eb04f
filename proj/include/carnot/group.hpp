#pragma once

// Step-two Carnot groups in exponential coordinates g = (z, sigma), z in R^m,
// sigma in R^k. The bracket is encoded by skew matrices J_1..J_k:
//   (z, s) o (z', s') = (z + z', s + s' + 1/2 <J_l z, z'>_l).

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "carnot/error.hpp"
#include "carnot/special.hpp"

namespace carnot {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

inline constexpr int kMaxHorizontal = 16;
inline constexpr int kMaxVertical = 4;

struct GroupPoint {
    Vec z;
    Vec sigma;

    GroupPoint() = default;
    GroupPoint(Vec z_, Vec sigma_) : z(std::move(z_)), sigma(std::move(sigma_)) {}

    static GroupPoint identity(int m, int k) { return {Vec::Zero(m), Vec::Zero(k)}; }
};

/// Eigen-decomposition of A(lambda) = J(lambda)^T J(lambda); mu are the square
/// roots of its eigenvalues, ascending.
struct SpectralData {
    Vec mu;
    Mat V;
};

struct KernelWeights {
    double log_det_j = 0.0;  // sum_i log(mu_i / sinh mu_i)
    Mat M;                   // V diag(mu_i / tanh mu_i) V^T
};

class GroupSpec {
public:
    GroupSpec() = default;

    int m() const { return m_; }
    int k() const { return static_cast<int>(J_.size()); }
    int Q() const { return m_ + 2 * k(); }
    const std::vector<Mat>& J() const { return J_; }
    const Mat& J(int l) const { return J_.at(l); }
    const std::string& name() const { return name_; }

    /// J(lambda) = sum_l lambda_l J_l.
    Mat J_of(const Vec& lambda) const {
        Mat out = Mat::Zero(m_, m_);
        for (int l = 0; l < k(); ++l) out += lambda[l] * J_[l];
        return out;
    }

    Mat A_of(const Vec& lambda) const {
        const Mat j = J_of(lambda);
        return j.transpose() * j;
    }

    void check_point(const GroupPoint& g) const {
        require(g.z.size() == m_ && g.sigma.size() == k(), Errc::DimensionMismatch,
                "point dimensions do not match the group");
        require(g.z.allFinite() && g.sigma.allFinite(), Errc::InvalidArgument, "point has non-finite entries");
    }

    friend GroupSpec make_custom(int m, int k, std::vector<Mat> J, std::string name);

private:
    int m_ = 0;
    std::vector<Mat> J_;
    std::string name_;
};

/// Validates the three structural invariants and builds the spec.
inline GroupSpec make_custom(int m, int k, std::vector<Mat> J, std::string name = "custom") {
    require(m >= 2 && k >= 1, Errc::InvalidArgument, "need m >= 2 and k >= 1");
    require(m <= kMaxHorizontal && k <= kMaxVertical, Errc::DimensionLimit, "supported sizes are m <= 16, k <= 4");
    require(static_cast<int>(J.size()) == k, Errc::DimensionMismatch, "expected k matrices");
    for (const auto& j : J) {
        require(j.rows() == m && j.cols() == m, Errc::DimensionMismatch, "J matrices must be m x m");
        require(j.allFinite(), Errc::InvalidArgument, "J has non-finite entries");
        require((j + j.transpose()).cwiseAbs().maxCoeff() <= 1e-12, Errc::NotSkew, "J matrix is not skew-symmetric");
    }
    // lambda -> J(lambda) injective: the J_l are independent as m^2-vectors.
    Mat flat(m * m, k);
    for (int l = 0; l < k; ++l) flat.col(l) = Eigen::Map<const Vec>(J[l].data(), m * m);
    Eigen::JacobiSVD<Mat> svd_flat(flat);
    const double tol_flat = 1e-10 * std::max(1.0, svd_flat.singularValues()(0));
    require(svd_flat.rank() == k && svd_flat.singularValues()(k - 1) > tol_flat, Errc::JNotInjective,
            "J matrices are linearly dependent");
    // [V1, V1] = V2: the vectors b_ij = (<J_l e_i, e_j>)_l span R^k.
    const int pairs = m * (m - 1) / 2;
    Mat b(k, pairs);
    int col = 0;
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j, ++col)
            for (int l = 0; l < k; ++l) b(l, col) = J[l](j, i);
    Eigen::JacobiSVD<Mat> svd_b(b);
    require(svd_b.singularValues()(k - 1) > 1e-10 * std::max(1.0, svd_b.singularValues()(0)),
            Errc::NotBracketGenerating, "brackets of V1 do not span V2");
    GroupSpec g;
    g.m_ = m;
    g.J_ = std::move(J);
    g.name_ = std::move(name);
    return g;
}

inline GroupSpec make_heisenberg(int n) {
    require(n >= 1, Errc::InvalidArgument, "Heisenberg index must be >= 1");
    const int m = 2 * n;
    Mat J = Mat::Zero(m, m);
    for (int b = 0; b < n; ++b) {
        J(2 * b, 2 * b + 1) = 1.0;
        J(2 * b + 1, 2 * b) = -1.0;
    }
    return make_custom(m, 1, {J}, "heisenberg:" + std::to_string(n));
}

/// H^1 x R: m = 3, k = 1, with a degenerate horizontal direction e_3.
inline GroupSpec make_h1xr() {
    Mat J = Mat::Zero(3, 3);
    J(0, 1) = 1.0;
    J(1, 0) = -1.0;
    return make_custom(3, 1, {J}, "h1xr");
}

/// Quaternionic H-type group on R^4 with k in {1, 2, 3}: J_1, J_2, J_3 are
/// left multiplication by i, j, k in the basis (1, i, j, k).
inline GroupSpec make_quaternionic(int k) {
    require(k >= 1 && k <= 3, Errc::InvalidArgument, "quaternionic H-type needs 1 <= k <= 3");
    Mat Li = Mat::Zero(4, 4), Lj = Mat::Zero(4, 4), Lk = Mat::Zero(4, 4);
    // columns are images of 1, i, j, k
    Li(1, 0) = 1; Li(0, 1) = -1; Li(3, 2) = 1; Li(2, 3) = -1;
    Lj(2, 0) = 1; Lj(3, 1) = -1; Lj(0, 2) = -1; Lj(1, 3) = 1;
    Lk(3, 0) = 1; Lk(2, 1) = 1; Lk(1, 2) = -1; Lk(0, 3) = -1;
    std::vector<Mat> J{Li, Lj, Lk};
    J.resize(k);
    return make_custom(4, k, std::move(J), "htype:" + std::to_string(k));
}

/// Builtin groups: "heisenberg:n", "h1xr", "htype:k".
inline GroupSpec group_from_name(const std::string& name) {
    auto arg = [&](const std::string& prefix) -> int {
        const std::string rest = name.substr(prefix.size());
        try {
            std::size_t used = 0;
            const int v = std::stoi(rest, &used);
            require(used == rest.size(), Errc::ConfigError, "bad group name '" + name + "'");
            return v;
        } catch (const std::logic_error&) {
            throw Error(Errc::ConfigError, "bad group name '" + name + "'");
        }
    };
    if (name == "h1xr") return make_h1xr();
    if (name.rfind("heisenberg:", 0) == 0) return make_heisenberg(arg("heisenberg:"));
    if (name.rfind("htype:", 0) == 0) return make_quaternionic(arg("htype:"));
    throw Error(Errc::ConfigError, "unknown group '" + name + "'");
}

inline GroupPoint multiply(const GroupSpec& G, const GroupPoint& a, const GroupPoint& b) {
    G.check_point(a);
    G.check_point(b);
    GroupPoint out{a.z + b.z, a.sigma + b.sigma};
    for (int l = 0; l < G.k(); ++l) out.sigma[l] += 0.5 * (G.J(l) * a.z).dot(b.z);
    return out;
}

inline GroupPoint inverse(const GroupPoint& g) { return {-g.z, -g.sigma}; }

inline GroupPoint dilate(const GroupSpec& G, double r, const GroupPoint& g) {
    require(r > 0.0 && std::isfinite(r), Errc::InvalidArgument, "dilation factor must be positive");
    G.check_point(g);
    return {r * g.z, r * r * g.sigma};
}

inline SpectralData spectral(const GroupSpec& G, const Vec& lambda) {
    require(lambda.size() == G.k(), Errc::DimensionMismatch, "lambda must have k entries");
    require(lambda.allFinite(), Errc::InvalidArgument, "lambda must be finite");
    Eigen::SelfAdjointEigenSolver<Mat> es(G.A_of(lambda));
    if (es.info() != Eigen::Success) throw Error(Errc::NumericFailure, "eigensolver did not converge");
    SpectralData out;
    out.mu = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    out.V = es.eigenvectors();
    return out;
}

inline KernelWeights kernel_weights(const SpectralData& sd) {
    KernelWeights w;
    const int m = static_cast<int>(sd.mu.size());
    Vec d(m);
    for (int i = 0; i < m; ++i) {
        w.log_det_j += special::log_x_over_sinh(sd.mu[i]);
        d[i] = special::x_over_tanh(sd.mu[i]);
    }
    w.M = sd.V * d.asDiagonal() * sd.V.transpose();
    w.M = 0.5 * (w.M + w.M.transpose());
    return w;
}

inline KernelWeights kernel_weights(const GroupSpec& G, const Vec& lambda) {
    return kernel_weights(spectral(G, lambda));
}

/// Left-invariant horizontal frame X_j = d/dz_j + 1/2 sum_l (J_l z)_j d/dsigma_l,
/// returned as the (m + k) x m matrix whose columns are the X_j at g.
inline Mat horizontal_frame(const GroupSpec& G, const Vec& z) {
    const int m = G.m(), k = G.k();
    Mat X = Mat::Zero(m + k, m);
    X.topRows(m).setIdentity();
    for (int l = 0; l < k; ++l) X.row(m + l) = 0.5 * (G.J(l) * z).transpose();
    return X;
}

inline std::string to_string(const GroupPoint& g) {
    std::ostringstream os;
    os << "(z=[";
    for (int i = 0; i < g.z.size(); ++i) os << (i ? "," : "") << g.z[i];
    os << "], sigma=[";
    for (int i = 0; i < g.sigma.size(); ++i) os << (i ? "," : "") << g.sigma[i];
    os << "])";
    return os.str();
}

} // namespace carnot
