// Copyright 2026 The QRS Steering Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * Dense complex linear algebra on 1-, 2- and 3-qubit Hilbert spaces.
 *
 * Multi-qubit operators use the fixed factor order (Alice, Bob, Referee):
 * qubit 0 is the leftmost tensor factor and the most significant bit of a
 * basis index.
 */

#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qrs/errors.hpp"

namespace qrs {

using Complex = std::complex<double>;

/// Dense complex matrix with a compile-time capacity of 8x8.
using Matrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, 8, 8>;

/// Tolerances shared by every validation in the library.
struct NumericPolicy {
    /// Slack for algebraic identities and Hermiticity.
    double algebraic = 1e-12;
    /// Slack for eigenvalue residuals, trace normalization and PSD checks.
    double spectral = 1e-10;
};

inline NumericPolicy &numeric_policy() {
    static NumericPolicy policy;
    return policy;
}

struct BlochVector {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr double dot(const BlochVector &o) const {
        return x * o.x + y * o.y + z * o.z;
    }
    double norm() const {
        return std::sqrt(dot(*this));
    }
    BlochVector normalized() const {
        double n = norm();
        return {x / n, y / n, z / n};
    }

    friend constexpr BlochVector operator+(const BlochVector &a, const BlochVector &b) {
        return {a.x + b.x, a.y + b.y, a.z + b.z};
    }
    friend constexpr BlochVector operator-(const BlochVector &a, const BlochVector &b) {
        return {a.x - b.x, a.y - b.y, a.z - b.z};
    }
    friend constexpr BlochVector operator-(const BlochVector &a) {
        return {-a.x, -a.y, -a.z};
    }
    friend constexpr BlochVector operator*(double k, const BlochVector &a) {
        return {k * a.x, k * a.y, k * a.z};
    }
    BlochVector &operator+=(const BlochVector &o) {
        x += o.x;
        y += o.y;
        z += o.z;
        return *this;
    }
    friend constexpr bool operator==(const BlochVector &, const BlochVector &) = default;
};

inline bool is_supported_dim(Eigen::Index d) {
    return d == 2 || d == 4 || d == 8;
}

/// Hermitian operator on a 2-, 4- or 8-dimensional space. Validated on construction.
class HermitianOp {
   public:
    explicit HermitianOp(Matrix m) : m_(std::move(m)) {
        if (m_.rows() != m_.cols() || !is_supported_dim(m_.rows())) {
            throw UnsupportedDimension(
                "operator dimension " + std::to_string(m_.rows()) + "x" + std::to_string(m_.cols()) +
                " not in {2,4,8}");
        }
        double tol = numeric_policy().algebraic;
        for (Eigen::Index i = 0; i < m_.rows(); ++i) {
            for (Eigen::Index j = i; j < m_.cols(); ++j) {
                if (std::abs(m_(i, j) - std::conj(m_(j, i))) > tol) {
                    throw ContractViolation("operator is not Hermitian at entry (" + std::to_string(i) +
                                            "," + std::to_string(j) + ")");
                }
            }
        }
    }

    static HermitianOp identity(int dim) {
        if (!is_supported_dim(dim)) {
            throw UnsupportedDimension("identity dimension " + std::to_string(dim) + " not in {2,4,8}");
        }
        return HermitianOp(Matrix::Identity(dim, dim));
    }

    int dim() const {
        return static_cast<int>(m_.rows());
    }
    int qubits() const {
        return dim() == 2 ? 1 : dim() == 4 ? 2 : 3;
    }
    const Matrix &matrix() const {
        return m_;
    }
    Complex operator()(int i, int j) const {
        return m_(i, j);
    }
    double trace() const {
        return m_.trace().real();
    }
    /// Complex transpose (equal to the complex conjugate for Hermitian matrices).
    HermitianOp transpose() const {
        return HermitianOp(m_.transpose());
    }

    friend HermitianOp operator+(const HermitianOp &a, const HermitianOp &b) {
        return HermitianOp(a.m_ + b.m_);
    }
    friend HermitianOp operator-(const HermitianOp &a, const HermitianOp &b) {
        return HermitianOp(a.m_ - b.m_);
    }
    friend HermitianOp operator*(double k, const HermitianOp &a) {
        return HermitianOp(k * a.m_);
    }

   private:
    Matrix m_;
};

/// Real part of Tr[a b]; exact for Hermitian a and b.
inline double trace_product(const HermitianOp &a, const HermitianOp &b) {
    if (a.dim() != b.dim()) {
        throw ContractViolation("trace_product dimension mismatch");
    }
    return (a.matrix().cwiseProduct(b.matrix().transpose())).sum().real();
}

namespace pauli {

inline HermitianOp x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return HermitianOp(m);
}
inline HermitianOp y() {
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return HermitianOp(m);
}
inline HermitianOp z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return HermitianOp(m);
}

}  // namespace pauli

/// v . sigma
inline HermitianOp pauli_dot(const BlochVector &v) {
    Matrix m(2, 2);
    m << v.z, Complex(v.x, -v.y), Complex(v.x, v.y), -v.z;
    return HermitianOp(m);
}

/// Real eigenvalues in ascending order.
inline std::vector<double> eigenvalues(const HermitianOp &h) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix(), Eigen::EigenvaluesOnly);
    const auto &ev = solver.eigenvalues();
    return std::vector<double>(ev.data(), ev.data() + ev.size());
}

/// Largest eigenvalue. Closed form for a single qubit.
inline double lambda_max(const HermitianOp &h) {
    if (h.dim() == 2) {
        double a = h(0, 0).real();
        double d = h(1, 1).real();
        double half = 0.5 * (a - d);
        return 0.5 * (a + d) + std::sqrt(half * half + std::norm(h(0, 1)));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(h.matrix());
    Eigen::Index top = solver.eigenvalues().size() - 1;
    double lambda = solver.eigenvalues()(top);
    Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 8, 1> v = solver.eigenvectors().col(top);
    double residual = (h.matrix() * v - lambda * v).norm();
    if (residual > numeric_policy().spectral) {
        throw ContractViolation("eigensolver residual " + std::to_string(residual) + " above tolerance");
    }
    return lambda;
}

/// Kronecker product a (x) b.
inline HermitianOp tensor(const HermitianOp &a, const HermitianOp &b) {
    int dim = a.dim() * b.dim();
    if (dim > 8) {
        throw UnsupportedDimension("tensor product dimension " + std::to_string(dim) + " exceeds 8");
    }
    Matrix m(dim, dim);
    for (int i = 0; i < a.dim(); ++i) {
        for (int j = 0; j < a.dim(); ++j) {
            m.block(i * b.dim(), j * b.dim(), b.dim(), b.dim()) = a(i, j) * b.matrix();
        }
    }
    return HermitianOp(m);
}

/// Bit i selects qubit i, with qubit 0 the leftmost tensor factor.
using SubsystemMask = std::uint32_t;

/// Traces out every qubit not selected by `keep`.
inline HermitianOp partial_trace(const HermitianOp &h, SubsystemMask keep) {
    int q = h.qubits();
    SubsystemMask all = (SubsystemMask{1} << q) - 1;
    if (keep == 0 || (keep & ~all) != 0) {
        throw InvalidArgument("invalid subsystem mask " + std::to_string(keep) + " for " + std::to_string(q) +
                              " qubits");
    }
    std::vector<int> kept_bits;
    std::vector<int> traced_bits;
    for (int i = 0; i < q; ++i) {
        // Bit position of qubit i inside a basis index.
        int bit = q - 1 - i;
        ((keep >> i) & 1 ? kept_bits : traced_bits).push_back(bit);
    }
    auto spread = [](int value, const std::vector<int> &bits) {
        int index = 0;
        for (std::size_t k = 0; k < bits.size(); ++k) {
            if ((value >> (bits.size() - 1 - k)) & 1) {
                index |= 1 << bits[k];
            }
        }
        return index;
    };
    int out_dim = 1 << kept_bits.size();
    int env_dim = 1 << traced_bits.size();
    Matrix m = Matrix::Zero(out_dim, out_dim);
    for (int r = 0; r < out_dim; ++r) {
        for (int c = 0; c < out_dim; ++c) {
            Complex sum = 0.0;
            for (int e = 0; e < env_dim; ++e) {
                int env = spread(e, traced_bits);
                sum += h(spread(r, kept_bits) | env, spread(c, kept_bits) | env);
            }
            m(r, c) = sum;
        }
    }
    return HermitianOp(m);
}

/// Unit-trace positive semidefinite operator.
class DensityMatrix {
   public:
    explicit DensityMatrix(HermitianOp op) : op_(std::move(op)) {
        const auto &policy = numeric_policy();
        double tr = op_.trace();
        if (std::abs(tr - 1.0) > policy.spectral) {
            throw InvalidState("density matrix trace " + std::to_string(tr) + " != 1");
        }
        double lowest = eigenvalues(op_).front();
        if (lowest < -policy.spectral) {
            throw InvalidState("density matrix has negative eigenvalue " + std::to_string(lowest));
        }
    }

    const HermitianOp &op() const {
        return op_;
    }
    int dim() const {
        return op_.dim();
    }

   private:
    HermitianOp op_;
};

/// (I + v . sigma) / 2
inline DensityMatrix state_from_bloch(const BlochVector &v) {
    if (v.norm() > 1.0 + numeric_policy().algebraic) {
        throw InvalidState("Bloch vector norm " + std::to_string(v.norm()) + " exceeds 1");
    }
    return DensityMatrix(0.5 * (HermitianOp::identity(2) + pauli_dot(v)));
}

/// Projector onto a pure state given by its amplitude vector.
inline HermitianOp projector(const std::vector<Complex> &amplitudes) {
    Eigen::Index d = static_cast<Eigen::Index>(amplitudes.size());
    Eigen::Matrix<Complex, Eigen::Dynamic, 1, 0, 8, 1> psi(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        psi(i) = amplitudes[static_cast<std::size_t>(i)];
    }
    psi.normalize();
    return HermitianOp(psi * psi.adjoint());
}

namespace states {

/// (|00> + |11>) / sqrt(2)
inline DensityMatrix phi_plus() {
    return DensityMatrix(projector({1.0, 0.0, 0.0, 1.0}));
}
/// (|01> - |10>) / sqrt(2)
inline DensityMatrix singlet() {
    return DensityMatrix(projector({0.0, 1.0, -1.0, 0.0}));
}
inline DensityMatrix product(const BlochVector &alice, const BlochVector &bob) {
    return DensityMatrix(tensor(state_from_bloch(alice).op(), state_from_bloch(bob).op()));
}
/// visibility * |Phi+><Phi+| + (1 - visibility) * I/4
inline DensityMatrix werner(double visibility) {
    if (visibility < 0.0 || visibility > 1.0) {
        throw InvalidArgument("Werner visibility must lie in [0,1]");
    }
    return DensityMatrix(visibility * phi_plus().op() + (0.25 * (1.0 - visibility)) * HermitianOp::identity(4));
}

}  // namespace states

}  // namespace qrs
