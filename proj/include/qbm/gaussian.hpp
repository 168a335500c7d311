#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "qbm/errors.hpp"
#include "qbm/model.hpp"

// Symplectic algebra on 4x4 covariance matrices in the ordering
// [x1, p1, x2, p2], convention Gamma_jk = 2 Re Tr[rho R_j R_k]. In this
// normalization a pure mode has symplectic eigenvalue 1.

namespace qbm {

/// sigma = direct sum of (0, 1; -1, 0) per mode.
inline const Mat4& symplectic_form() {
    static const Mat4 sg = [] {
        Mat4 s = Mat4::Zero();
        s(0, 1) = s(2, 3) = 1.0;
        s(1, 0) = s(3, 2) = -1.0;
        return s;
    }();
    return sg;
}

inline void check_covariance(const Mat4& g) {
    const double scale = g.cwiseAbs().maxCoeff();
    if (!(scale > 0.0) || !g.allFinite()) throw InvalidParams("covariance matrix is not finite");
    if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw InvalidParams("covariance matrix is not symmetric");
    for (int i = 0; i < 4; ++i)
        if (!(g(i, i) > 0.0)) throw InvalidParams("covariance diagonal must be positive");
}

/// Partial transposition of mode 1, i.e. p1 -> -p1: Gamma^T1 = L Gamma L with
/// L = diag(1, -1, 1, 1). An exact involution.
inline Mat4 partial_transpose(const Mat4& g) {
    Mat4 out = g;
    for (int j = 0; j < 4; ++j) {
        if (j == 1) continue;
        out(1, j) = -out(1, j);
        out(j, 1) = -out(j, 1);
    }
    return out;
}

/// Symplectic spectrum {nu_1 >= nu_2}: positive square roots of the
/// eigenvalues of -sigma Gamma sigma Gamma. The four eigenvalues of that
/// matrix occur in degenerate pairs; `paired` records that the pairing check
/// passed (it is also enforced, so reaching a result implies paired = true).
struct SymplecticSpectrum {
    std::array<double, 2> nu = {0.0, 0.0};
    bool paired = false;
};

inline SymplecticSpectrum symplectic_spectrum(const Mat4& g) {
    check_covariance(g);
    const Mat4& sg = symplectic_form();
    const Mat4 K = -sg * g * sg * g;
    Eigen::EigenSolver<Mat4> es(K, /*computeEigenvectors=*/false);
    Vec4c ev = es.eigenvalues();

    double scale = 0.0;
    for (int i = 0; i < 4; ++i) scale = std::max(scale, std::abs(ev(i)));
    for (int i = 0; i < 4; ++i) {
        if (std::abs(ev(i).imag()) > 1e-8 * scale)
            throw NonPositive("eigenvalue of -sigma G sigma G has imaginary residue");
        if (!(ev(i).real() > 0.0))
            throw NonPositive("eigenvalue of -sigma G sigma G is not positive");
    }

    std::array<double, 4> re;
    for (int i = 0; i < 4; ++i) re[i] = ev(i).real();
    std::sort(re.begin(), re.end(), std::greater<double>());
    for (int k = 0; k < 2; ++k) {
        const double a = re[2 * k], b = re[2 * k + 1];
        if (std::abs(a - b) > 1e-7 * std::max(a, b)) {
            std::ostringstream os;
            os << "spectrum of -sigma G sigma G does not pair up: " << a << " vs " << b;
            throw UnpairedSpectrum(os.str());
        }
    }

    SymplecticSpectrum sp;
    sp.nu = {std::sqrt((re[0] + re[1]) / 2.0), std::sqrt((re[2] + re[3]) / 2.0)};
    sp.paired = true;
    return sp;
}

/// Logarithmic negativity -2 sum_k log2(min(1, nu~_k)) over the symplectic
/// spectrum of the partial transpose. Values within 1e-12 of 1 are treated as
/// exactly 1, making the separability boundary an exact zero.
inline double log_negativity(const Mat4& g) {
    const SymplecticSpectrum sp = symplectic_spectrum(partial_transpose(g));
    double ln = 0.0;
    for (double nu : sp.nu) {
        if (std::abs(nu - 1.0) < 1e-12) nu = 1.0;
        ln += std::log2(std::min(1.0, std::abs(nu)));
    }
    const double value = -2.0 * ln;
    return value == 0.0 ? 0.0 : value;  // normalise -0
}

/// Smallest symplectic eigenvalue of the partial transpose (< 1 witnesses
/// entanglement).
inline double nu_min_pt(const Mat4& g) {
    return symplectic_spectrum(partial_transpose(g)).nu[1];
}

/// Von Neumann entropy in nats: S = sum_k (N_k+1) ln(N_k+1) - N_k ln N_k with
/// thermal occupations N_k = (nu_k - 1)/2 from the spectrum of Gamma itself.
/// Tiny negative N_k from rounding (nu_k >= 1 - 1e-6) are clamped to zero;
/// anything lower is a genuine physicality violation of the pre-Lindblad
/// evolution and is reported, not hidden.
inline double von_neumann_entropy(const Mat4& g) {
    const SymplecticSpectrum sp = symplectic_spectrum(g);
    double S = 0.0;
    for (double nu : sp.nu) {
        if (nu < 1.0 - 1e-6) {
            std::ostringstream os;
            os << "symplectic eigenvalue " << nu << " < 1: state is non-physical "
               << "(master-equation regime breakdown)";
            throw NonPhysical(os.str());
        }
        double N = (nu - 1.0) / 2.0;
        if (N < 0.0) N = 0.0;
        if (N > 0.0) S += (N + 1.0) * std::log(N + 1.0) - N * std::log(N);
    }
    return S;
}

}  // namespace qbm
