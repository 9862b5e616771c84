// Representations of linear maps on operators (superoperator matrix, Choi
// matrix, Kraus set), tensor extensions, and complete-positivity / positivity
// certification.
//
// Choi convention: unnormalized, C = sum_ij E_ij kron Lambda[E_ij].
// Kraus orientation: Lambda[rho] = sum_l V_l^dag rho V_l.

#pragma once

#include <cstdint>
#include <vector>

#include "oqs/operator_core.hpp"

namespace oqs {

struct Superoperator {
    int dim = 0;        // system dimension d
    Mat matrix;         // d^2 x d^2, acts on column-stacked operators

    Mat apply(const Mat& x) const;

    static Superoperator identity(int d);
    static Superoperator transposition(int d);
    static Superoperator from_matrix(Mat m);
};

struct ChoiMatrix {
    int dim = 0;
    Mat matrix;  // d^2 x d^2
};

struct KrausSet {
    std::vector<Mat> operators;  // the V_l

    Mat apply(const Mat& x) const;  // sum V^dag x V
};

struct CpVerdict {
    bool completely_positive = false;
    double witness_eigenvalue = 0.0;  // min Choi eigenvalue
    Vec witness_state;                // its eigenvector (entangled witness)
};

struct PositivityProbe {
    bool violated = false;
    double min_eigenvalue = 0.0;
    Vec witness_state;  // pure state achieving the minimum
};

ChoiMatrix to_choi(const Superoperator& s);
Superoperator to_super(const ChoiMatrix& c);
Superoperator to_super(const KrausSet& k, int dim);

bool is_hermiticity_preserving(const Superoperator& s,
                               double tol = default_policy().hermiticity);
bool is_trace_preserving(const Superoperator& s, double tol = default_policy().trace);
bool is_trace_annihilating(const Superoperator& s, double tol = default_policy().trace);

CpVerdict is_completely_positive(const Superoperator& s,
                                 double tol = default_policy().psd_slack);

KrausSet kraus_decompose(const Superoperator& s, double tol = default_policy().psd_slack);

// Acts as s on factor 1 of a (dim x n) bipartition, identically on factor 2.
Superoperator tensor_with_identity(const Superoperator& s, int n);

// (s1 kron s2)[A kron B] = s1[A] kron s2[B], extended linearly.
Superoperator tensor_product_map(const Superoperator& s1, const Superoperator& s2);

// Heuristic search for a pure state whose image has a negative eigenvalue.
// "no violation found" is not a proof of positivity.
PositivityProbe probe_positivity(const Superoperator& s, int samples = 2000,
                                 int refine = 400, std::uint64_t seed = 1,
                                 double tol = default_policy().psd_slack);

}  // namespace oqs
