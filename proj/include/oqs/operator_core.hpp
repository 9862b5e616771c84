// Dense complex linear algebra on finite Hilbert spaces: Hermitian
// eigendecomposition, Kronecker products, partial trace, matrix exponential,
// and column-stacking vectorization.
//
// Vectorization convention (used everywhere in this project): column
// stacking, vec(A X B) = (B^T kron A) vec(X).

#pragma once

#include "oqs/types.hpp"

namespace oqs {

struct Overflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigendecomposition of a Hermitian operator, eigenvalues ascending.
struct Spectrum {
    RealVec eigenvalues;
    Mat eigenvectors;  // columns, orthonormal
};

// Hermitian, positive semidefinite, unit-trace operator.
struct DensityMatrix {
    Mat op;
    double tolerance = 1e-10;

    // Validates hermiticity, trace one and positivity within `tol`.
    static DensityMatrix checked(Mat m, double tol = 1e-10);
};

bool is_hermitian(const Mat& a, double tol = default_policy().hermiticity);
void require_hermitian(const Mat& a, double tol = default_policy().hermiticity);

Spectrum eig_hermitian(const Mat& a);

Mat kron(const Mat& a, const Mat& b);

// Trace over the discarded factor of a (d1 x d2) bipartition; keep is 1 or 2.
Mat partial_trace(const Mat& a, int d1, int d2, int keep);

// Scaling-and-squaring Pade approximant; throws Overflow for huge norms.
Mat expm(const Mat& a);

Vec vectorize(const Mat& a);
Mat unvectorize(const Vec& v, int dim);

// Matrix of the map X -> A X B under column-stacking.
Mat sandwich_superop(const Mat& a, const Mat& b);

// Matrix of X -> -i [h, X].
Mat hamiltonian_superop(const Mat& h);

// Matrix of X -> [a, X b]  (= a X b - X b a).
Mat commutator_right_superop(const Mat& a, const Mat& b);

// Matrix of X -> [a X, b]  (= a X b - b a X).
Mat commutator_left_superop(const Mat& a, const Mat& b);

double trace_distance(const Mat& a, const Mat& b);

}  // namespace oqs
