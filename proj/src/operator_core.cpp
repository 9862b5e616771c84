#include "oqs/operator_core.hpp"

#include <cmath>

#include <Eigen/Eigenvalues>

namespace oqs {

bool is_hermitian(const Mat& a, double tol) {
    if (a.rows() != a.cols()) return false;
    return (a - a.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

void require_hermitian(const Mat& a, double tol) {
    if (!is_hermitian(a, tol)) {
        throw NotHermitian("operator is not Hermitian within tolerance");
    }
}

DensityMatrix DensityMatrix::checked(Mat m, double tol) {
    if (m.rows() != m.cols()) {
        throw DimensionMismatch("density matrix must be square");
    }
    if (!is_hermitian(m, tol)) {
        throw NotHermitian("density matrix is not Hermitian within tolerance");
    }
    if (std::abs(m.trace() - cplx(1.0)) > tol) {
        throw std::runtime_error("density matrix trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Mat> es(m, Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -tol) {
        throw std::runtime_error("density matrix has a negative eigenvalue");
    }
    return DensityMatrix{std::move(m), tol};
}

Spectrum eig_hermitian(const Mat& a) {
    require_hermitian(a);
    Eigen::SelfAdjointEigenSolver<Mat> es(a);
    if (es.info() != Eigen::Success) {
        throw std::runtime_error("Hermitian eigensolver failed");
    }
    return Spectrum{es.eigenvalues(), es.eigenvectors()};
}

Mat kron(const Mat& a, const Mat& b) {
    Mat out(a.rows() * b.rows(), a.cols() * b.cols());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Mat partial_trace(const Mat& a, int d1, int d2, int keep) {
    if (a.rows() != a.cols() || a.rows() != Eigen::Index(d1) * d2) {
        throw DimensionMismatch("partial_trace: dim(a) != d1*d2");
    }
    if (keep != 1 && keep != 2) {
        throw DimensionMismatch("partial_trace: keep must be 1 or 2");
    }
    // index (i1 i2) -> i1*d2 + i2, first factor is the slow index
    if (keep == 1) {
        Mat out = Mat::Zero(d1, d1);
        for (int i = 0; i < d1; ++i)
            for (int j = 0; j < d1; ++j)
                for (int k = 0; k < d2; ++k)
                    out(i, j) += a(i * d2 + k, j * d2 + k);
        return out;
    }
    Mat out = Mat::Zero(d2, d2);
    for (int i = 0; i < d2; ++i)
        for (int j = 0; j < d2; ++j)
            for (int k = 0; k < d1; ++k)
                out(i, j) += a(k * d2 + i, k * d2 + j);
    return out;
}

namespace {

// Pade-13 scaling and squaring (Higham 2005 coefficients).
Mat expm_pade13(const Mat& a) {
    static const double b[] = {64764752532480000., 32382376266240000., 7771770303897600.,
                               1187353796428800.,  129060195264000.,   10559470521600.,
                               670442572800.,      33522128640.,       1323241920.,
                               40840800.,          960960.,            16380.,
                               182.,               1.};
    const Eigen::Index n = a.rows();
    const Mat id = Mat::Identity(n, n);
    const Mat a2 = a * a;
    const Mat a4 = a2 * a2;
    const Mat a6 = a2 * a4;
    Mat u = a * (a6 * (b[13] * a6 + b[11] * a4 + b[9] * a2) + b[7] * a6 + b[5] * a4 +
                 b[3] * a2 + b[1] * id);
    Mat v = a6 * (b[12] * a6 + b[10] * a4 + b[8] * a2) + b[6] * a6 + b[4] * a4 + b[2] * a2 +
            b[0] * id;
    return (v - u).partialPivLu().solve(v + u);
}

}  // namespace

Mat expm(const Mat& a) {
    if (a.rows() != a.cols()) {
        throw DimensionMismatch("expm: matrix must be square");
    }
    const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // inf-norm
    if (!std::isfinite(norm)) {
        throw Overflow("expm: non-finite entries");
    }
    if (norm > 1e6) {
        throw Overflow("expm: norm exceeds the supported bound 1e6");
    }
    constexpr double theta13 = 5.371920351148152;
    int squarings = 0;
    Mat scaled = a;
    if (norm > theta13) {
        squarings = static_cast<int>(std::ceil(std::log2(norm / theta13)));
        scaled /= std::pow(2.0, squarings);
    }
    Mat e = expm_pade13(scaled);
    for (int i = 0; i < squarings; ++i) e = e * e;
    return e;
}

Vec vectorize(const Mat& a) {
    return Eigen::Map<const Vec>(a.data(), a.size());
}

Mat unvectorize(const Vec& v, int dim) {
    if (v.size() != Eigen::Index(dim) * dim) {
        throw DimensionMismatch("unvectorize: size mismatch");
    }
    return Eigen::Map<const Mat>(v.data(), dim, dim);
}

Mat sandwich_superop(const Mat& a, const Mat& b) {
    return kron(b.transpose(), a);
}

Mat hamiltonian_superop(const Mat& h) {
    const Eigen::Index d = h.rows();
    const Mat id = Mat::Identity(d, d);
    return cplx(0, -1) * (sandwich_superop(h, id) - sandwich_superop(id, h));
}

Mat commutator_right_superop(const Mat& a, const Mat& b) {
    const Mat id = Mat::Identity(a.rows(), a.cols());
    return sandwich_superop(a, b) - sandwich_superop(id, b * a);
}

Mat commutator_left_superop(const Mat& a, const Mat& b) {
    const Mat id = Mat::Identity(a.rows(), a.cols());
    return sandwich_superop(a, b) - sandwich_superop(b * a, id);
}

double trace_distance(const Mat& a, const Mat& b) {
    Mat diff = b - a;
    diff = (diff + diff.adjoint().eval()) / 2.0;  // symmetrize numerical noise
    Eigen::SelfAdjointEigenSolver<Mat> es(diff, Eigen::EigenvaluesOnly);
    return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

}  // namespace oqs
