#include "oqs/channels.hpp"

#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>

namespace oqs {

Mat Superoperator::apply(const Mat& x) const {
    if (x.rows() != dim || x.cols() != dim) {
        throw DimensionMismatch("Superoperator::apply: operand dimension mismatch");
    }
    return unvectorize(matrix * vectorize(x), dim);
}

Superoperator Superoperator::identity(int d) {
    return Superoperator{d, Mat::Identity(Eigen::Index(d) * d, Eigen::Index(d) * d)};
}

Superoperator Superoperator::transposition(int d) {
    Mat m = Mat::Zero(Eigen::Index(d) * d, Eigen::Index(d) * d);
    // maps E_ij to E_ji: column vec(E_ij) = j*d+i, image vec(E_ji) = i*d+j
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) m(i * d + j, j * d + i) = 1.0;
    return Superoperator{d, std::move(m)};
}

Superoperator Superoperator::from_matrix(Mat m) {
    const auto n = m.rows();
    const int d = static_cast<int>(std::lround(std::sqrt(double(n))));
    if (m.cols() != n || Eigen::Index(d) * d != n) {
        throw DimensionMismatch("Superoperator::from_matrix: not a d^2 x d^2 matrix");
    }
    return Superoperator{d, std::move(m)};
}

Mat KrausSet::apply(const Mat& x) const {
    Mat out = Mat::Zero(x.rows(), x.cols());
    for (const Mat& v : operators) out += v.adjoint() * x * v;
    return out;
}

ChoiMatrix to_choi(const Superoperator& s) {
    const int d = s.dim;
    Mat c(Eigen::Index(d) * d, Eigen::Index(d) * d);
    Mat e = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            e(i, j) = 1.0;
            c.block(i * d, j * d, d, d) = s.apply(e);
            e(i, j) = 0.0;
        }
    }
    return ChoiMatrix{d, std::move(c)};
}

Superoperator to_super(const ChoiMatrix& c) {
    const int d = c.dim;
    Mat m(Eigen::Index(d) * d, Eigen::Index(d) * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            m.col(Eigen::Index(j) * d + i) =
                vectorize(c.matrix.block(i * d, j * d, d, d));
    return Superoperator{d, std::move(m)};
}

Superoperator to_super(const KrausSet& k, int dim) {
    Mat m = Mat::Zero(Eigen::Index(dim) * dim, Eigen::Index(dim) * dim);
    for (const Mat& v : k.operators) m += sandwich_superop(v.adjoint(), v);
    return Superoperator{dim, std::move(m)};
}

bool is_hermiticity_preserving(const Superoperator& s, double tol) {
    // equivalent to the Choi matrix being Hermitian
    const ChoiMatrix c = to_choi(s);
    return (c.matrix - c.matrix.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

namespace {

// max_ij |Tr Lambda[E_ij] - target_ij| with target = identity's traces or zero
double trace_defect(const Superoperator& s, bool preserve) {
    const int d = s.dim;
    double worst = 0.0;
    Mat e = Mat::Zero(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            e(i, j) = 1.0;
            cplx tr = s.apply(e).trace();
            if (preserve && i == j) tr -= 1.0;
            worst = std::max(worst, std::abs(tr));
            e(i, j) = 0.0;
        }
    }
    return worst;
}

}  // namespace

bool is_trace_preserving(const Superoperator& s, double tol) {
    return trace_defect(s, true) <= tol;
}

bool is_trace_annihilating(const Superoperator& s, double tol) {
    return trace_defect(s, false) <= tol;
}

CpVerdict is_completely_positive(const Superoperator& s, double tol) {
    if (!is_hermiticity_preserving(s, 1e-9)) {
        throw NotHermiticityPreserving("is_completely_positive: map is not hermiticity-preserving");
    }
    const ChoiMatrix c = to_choi(s);
    Mat h = (c.matrix + c.matrix.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    const double lo = es.eigenvalues()(0);
    return CpVerdict{lo >= -tol, lo, es.eigenvectors().col(0)};
}

KrausSet kraus_decompose(const Superoperator& s, double tol) {
    const CpVerdict v = is_completely_positive(s, tol);
    if (!v.completely_positive) {
        throw NotCP("kraus_decompose: Choi matrix has a negative eigenvalue");
    }
    const ChoiMatrix c = to_choi(s);
    Mat h = (c.matrix + c.matrix.adjoint()) / 2.0;
    Eigen::SelfAdjointEigenSolver<Mat> es(h);
    KrausSet out;
    for (Eigen::Index l = 0; l < es.eigenvalues().size(); ++l) {
        const double lam = es.eigenvalues()(l);
        if (lam <= tol) continue;
        // Choi eigenvector u gives K = sqrt(lam) unvec(u) with Lambda = K rho K^dag;
        // the V_l of the V^dag rho V orientation are the adjoints.
        Mat k = std::sqrt(lam) * unvectorize(es.eigenvectors().col(l), s.dim);
        out.operators.push_back(k.adjoint());
    }
    return out;
}

Superoperator tensor_product_map(const Superoperator& s1, const Superoperator& s2) {
    const int d1 = s1.dim, d2 = s2.dim;
    const int dd = d1 * d2;
    Mat m(Eigen::Index(dd) * dd, Eigen::Index(dd) * dd);
    Mat e1 = Mat::Zero(d1, d1), e2 = Mat::Zero(d2, d2);
    for (int i1 = 0; i1 < d1; ++i1) {
        for (int j1 = 0; j1 < d1; ++j1) {
            e1(i1, j1) = 1.0;
            const Mat img1 = s1.apply(e1);
            for (int i2 = 0; i2 < d2; ++i2) {
                for (int j2 = 0; j2 < d2; ++j2) {
                    e2(i2, j2) = 1.0;
                    const Mat img = kron(img1, s2.apply(e2));
                    const Eigen::Index col =
                        Eigen::Index(j1 * d2 + j2) * dd + (i1 * d2 + i2);
                    m.col(col) = vectorize(img);
                    e2(i2, j2) = 0.0;
                }
            }
            e1(i1, j1) = 0.0;
        }
    }
    return Superoperator{dd, std::move(m)};
}

Superoperator tensor_with_identity(const Superoperator& s, int n) {
    return tensor_product_map(s, Superoperator::identity(n));
}

PositivityProbe probe_positivity(const Superoperator& s, int samples, int refine,
                                 std::uint64_t seed, double tol) {
    if (!is_hermiticity_preserving(s, 1e-9)) {
        throw NotHermiticityPreserving("probe_positivity: map is not hermiticity-preserving");
    }
    const int d = s.dim;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto random_state = [&] {
        Vec psi(d);
        for (int i = 0; i < d; ++i) psi(i) = cplx(gauss(rng), gauss(rng));
        psi.normalize();
        return psi;
    };
    auto min_eig = [&](const Vec& psi) {
        Mat img = s.apply(psi * psi.adjoint());
        img = (img + img.adjoint().eval()) / 2.0;
        Eigen::SelfAdjointEigenSolver<Mat> es(img, Eigen::EigenvaluesOnly);
        return es.eigenvalues()(0);
    };

    Vec best = random_state();
    double best_val = min_eig(best);
    for (int i = 1; i < samples; ++i) {
        Vec psi = random_state();
        const double v = min_eig(psi);
        if (v < best_val) {
            best_val = v;
            best = psi;
        }
    }
    // local refinement: shrinking random perturbations around the best sample
    double sigma = 0.3;
    for (int i = 0; i < refine; ++i) {
        Vec psi = best;
        for (int k = 0; k < d; ++k) psi(k) += sigma * cplx(gauss(rng), gauss(rng));
        psi.normalize();
        const double v = min_eig(psi);
        if (v < best_val) {
            best_val = v;
            best = psi;
        } else {
            sigma *= 0.99;
        }
    }
    return PositivityProbe{best_val < -tol, best_val, best};
}

}  // namespace oqs
