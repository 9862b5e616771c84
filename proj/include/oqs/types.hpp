// Shared aliases and the numeric tolerance policy used across the library.

#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace oqs {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RealVec = Eigen::VectorXd;

// Single source of truth for the tolerances the checks below use.
struct NumericPolicy {
    double hermiticity = 1e-12;  // max |A - A^dag| entry
    double psd_slack = 1e-10;    // min eigenvalue >= -psd_slack
    double reconstruction = 1e-10;
    double trace = 1e-10;
};

inline const NumericPolicy& default_policy() {
    static const NumericPolicy p{};
    return p;
}

struct NotHermitian : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DegenerateSpectrum : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotCP : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NotHermiticityPreserving : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NegativeTime : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonIntegrable : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnregisteredTerm : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IntegratorFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct QuadratureFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DimensionCap : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct FitFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace oqs
