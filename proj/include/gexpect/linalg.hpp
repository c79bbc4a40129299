#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <vector>

namespace gexpect {

/// Largest state or noise dimension handled by the fixed-size containers.
inline constexpr int kMaxDim = 4;

using Vec = std::array<double, kMaxDim>;

/**
 * Small dense row-major matrix with a compile-time capacity of kMaxDim x kMaxDim.
 *
 * Used for diffusion coefficients (n x d), covariance controls and their
 * square roots. Entries outside rows() x cols() are kept at zero.
 */
class SmallMat {
public:
    SmallMat() = default;
    SmallMat(int rows, int cols) : rows_(rows), cols_(cols) {
        if (rows < 1 || cols < 1 || rows > kMaxDim || cols > kMaxDim) {
            throw std::invalid_argument("SmallMat: dimensions must lie in [1, " +
                                        std::to_string(kMaxDim) + "]");
        }
    }

    static SmallMat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        const int r = static_cast<int>(rows.size());
        const int c = r > 0 ? static_cast<int>(rows.begin()->size()) : 0;
        SmallMat m(r, c);
        int i = 0;
        for (const auto& row : rows) {
            if (static_cast<int>(row.size()) != c) {
                throw std::invalid_argument("SmallMat: ragged rows");
            }
            int j = 0;
            for (double v : row) m(i, j++) = v;
            ++i;
        }
        return m;
    }

    static SmallMat identity(int n) {
        SmallMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    double& operator()(int i, int j) { return v_[static_cast<std::size_t>(i * kMaxDim + j)]; }
    double operator()(int i, int j) const { return v_[static_cast<std::size_t>(i * kMaxDim + j)]; }

    SmallMat transpose() const {
        SmallMat t(cols_, rows_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    double frobenius() const {
        double s = 0.0;
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * (*this)(i, j);
        return std::sqrt(s);
    }

    friend SmallMat operator*(const SmallMat& a, const SmallMat& b) {
        if (a.cols_ != b.rows_) throw std::invalid_argument("SmallMat: shape mismatch in product");
        SmallMat c(a.rows_, b.cols_);
        for (int i = 0; i < a.rows_; ++i)
            for (int k = 0; k < a.cols_; ++k) {
                const double aik = a(i, k);
                for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
            }
        return c;
    }

    friend bool operator==(const SmallMat& a, const SmallMat& b) {
        if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
        for (int i = 0; i < a.rows_; ++i)
            for (int j = 0; j < a.cols_; ++j)
                if (a(i, j) != b(i, j)) return false;
        return true;
    }

private:
    int rows_ = 1;
    int cols_ = 1;
    std::array<double, kMaxDim * kMaxDim> v_{};
};

/**
 * Dense symmetric d x d matrix, the argument of the G operator.
 *
 * Construction from arbitrary entries checks symmetry to a relative
 * tolerance of 1e-12 and then stores the exactly symmetrized matrix, so
 * entry(i,j) == entry(j,i) holds bit-for-bit afterwards.
 */
class SymMatrix {
public:
    static constexpr double kSymmetryTol = 1e-12;

    SymMatrix() = default;
    explicit SymMatrix(int dim) : dim_(dim) {
        if (dim < 1 || dim > kMaxDim) {
            throw std::invalid_argument("SymMatrix: dimension must lie in [1, " +
                                        std::to_string(kMaxDim) + "]");
        }
    }

    static SymMatrix zero(int dim) { return SymMatrix(dim); }

    static SymMatrix identity(int dim) {
        SymMatrix m(dim);
        for (int i = 0; i < dim; ++i) m.a_[idx(i, i)] = 1.0;
        return m;
    }

    static SymMatrix diagonal(const std::vector<double>& diag) {
        SymMatrix m(static_cast<int>(diag.size()));
        for (int i = 0; i < m.dim_; ++i) m.a_[idx(i, i)] = diag[static_cast<std::size_t>(i)];
        return m;
    }

    static SymMatrix from_rows(std::initializer_list<std::initializer_list<double>> rows) {
        SmallMat m = SmallMat::from_rows(rows);
        return from_matrix(m);
    }

    static SymMatrix from_rows(const std::vector<std::vector<double>>& rows) {
        const int d = static_cast<int>(rows.size());
        SmallMat m(d, d);
        for (int i = 0; i < d; ++i) {
            if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != d) {
                throw std::invalid_argument("SymMatrix: matrix must be square");
            }
            for (int j = 0; j < d; ++j) m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
        return from_matrix(m);
    }

    /// Rejects matrices whose asymmetry exceeds kSymmetryTol relative to the largest entry.
    static SymMatrix from_matrix(const SmallMat& m) {
        if (m.rows() != m.cols()) throw std::invalid_argument("SymMatrix: matrix must be square");
        SymMatrix s(m.rows());
        double scale = 0.0;
        for (int i = 0; i < m.rows(); ++i)
            for (int j = 0; j < m.cols(); ++j) scale = std::max(scale, std::abs(m(i, j)));
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = i; j < m.cols(); ++j) {
                const double gap = std::abs(m(i, j) - m(j, i));
                if (gap > kSymmetryTol * std::max(scale, 1e-300)) {
                    throw std::invalid_argument("SymMatrix: input is not symmetric (entry " +
                                                std::to_string(i) + "," + std::to_string(j) + ")");
                }
                s.set(i, j, 0.5 * (m(i, j) + m(j, i)));
            }
        }
        return s;
    }

    int dim() const { return dim_; }
    double operator()(int i, int j) const { return a_[idx(i, j)]; }

    /// Sets both (i,j) and (j,i).
    void set(int i, int j, double v) {
        a_[idx(i, j)] = v;
        a_[idx(j, i)] = v;
    }

    double trace() const {
        double t = 0.0;
        for (int i = 0; i < dim_; ++i) t += a_[idx(i, i)];
        return t;
    }

    /// tr(A A^T), i.e. the squared Frobenius norm.
    double frobenius_sq() const {
        double s = 0.0;
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) s += a_[idx(i, j)] * a_[idx(i, j)];
        return s;
    }

    SmallMat to_matrix() const {
        SmallMat m(dim_, dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) m(i, j) = a_[idx(i, j)];
        return m;
    }

    friend SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
        check_same(a, b);
        SymMatrix c(a.dim_);
        for (std::size_t k = 0; k < c.a_.size(); ++k) c.a_[k] = a.a_[k] + b.a_[k];
        return c;
    }
    friend SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
        check_same(a, b);
        SymMatrix c(a.dim_);
        for (std::size_t k = 0; k < c.a_.size(); ++k) c.a_[k] = a.a_[k] - b.a_[k];
        return c;
    }
    friend SymMatrix operator*(double s, const SymMatrix& a) {
        SymMatrix c(a.dim_);
        for (std::size_t k = 0; k < c.a_.size(); ++k) c.a_[k] = s * a.a_[k];
        return c;
    }
    friend bool operator==(const SymMatrix& a, const SymMatrix& b) {
        return a.dim_ == b.dim_ && a.a_ == b.a_;
    }

private:
    static constexpr std::size_t idx(int i, int j) { return static_cast<std::size_t>(i * kMaxDim + j); }
    static void check_same(const SymMatrix& a, const SymMatrix& b) {
        if (a.dim_ != b.dim_) throw std::invalid_argument("SymMatrix: dimension mismatch");
    }

    int dim_ = 1;
    std::array<double, kMaxDim * kMaxDim> a_{};
};

/// Eigenvalues (ascending) and matching orthonormal eigenvectors stored as columns.
struct EigenDecomposition {
    std::vector<double> values;
    SmallMat vectors;
};

/**
 * Cyclic Jacobi eigen-decomposition of a symmetric matrix.
 *
 * Sweeps until the off-diagonal Frobenius mass drops below tol times the
 * matrix norm. A 2x2 matrix is diagonalised by a single rotation.
 */
inline EigenDecomposition jacobi_eigen(const SymMatrix& s, double tol = 1e-12, int max_sweeps = 64) {
    const int n = s.dim();
    SmallMat a = s.to_matrix();
    SmallMat v = SmallMat::identity(n);
    const double norm = std::sqrt(s.frobenius_sq());

    auto off_diag = [&] {
        double off = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += 2.0 * a(i, j) * a(i, j);
        return std::sqrt(off);
    };

    for (int sweep = 0; sweep < max_sweeps && norm > 0.0; ++sweep) {
        if (off_diag() <= tol * norm) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = 0.5 * (a(q, q) - a(p, p)) / apq;
                const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double sn = t * c;
                for (int k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - sn * akq;
                    a(k, q) = sn * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - sn * aqk;
                    a(q, k) = sn * apk + c * aqk;
                }
                for (int k = 0; k < n; ++k) {
                    const double vkp = v(k, p);
                    const double vkq = v(k, q);
                    v(k, p) = c * vkp - sn * vkq;
                    v(k, q) = sn * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<int> order(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
    std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });

    EigenDecomposition out;
    out.values.resize(static_cast<std::size_t>(n));
    out.vectors = SmallMat(n, n);
    for (int k = 0; k < n; ++k) {
        const int src = order[static_cast<std::size_t>(k)];
        out.values[static_cast<std::size_t>(k)] = a(src, src);
        for (int i = 0; i < n; ++i) out.vectors(i, k) = v(i, src);
    }
    return out;
}

inline double min_eigenvalue(const SymMatrix& s) { return jacobi_eigen(s).values.front(); }
inline double max_eigenvalue(const SymMatrix& s) { return jacobi_eigen(s).values.back(); }

/// Q diag(f(lambda)) Q^T for a symmetric matrix.
template <typename F>
SymMatrix spectral_map(const SymMatrix& s, F&& f) {
    const EigenDecomposition e = jacobi_eigen(s);
    const int n = s.dim();
    SymMatrix out(n);
    for (int i = 0; i < n; ++i) {
        for (int j = i; j < n; ++j) {
            double acc = 0.0;
            for (int k = 0; k < n; ++k) {
                acc += e.vectors(i, k) * f(e.values[static_cast<std::size_t>(k)]) * e.vectors(j, k);
            }
            out.set(i, j, acc);
        }
    }
    return out;
}

/// Symmetric square root of a positive semidefinite matrix.
inline SymMatrix sqrt_psd(const SymMatrix& s) {
    return spectral_map(s, [](double lam) { return std::sqrt(std::max(lam, 0.0)); });
}

/// S^T M S for an n x d matrix S and symmetric n x n M; result is d x d.
inline SymMatrix congruence(const SmallMat& s, const SymMatrix& m) {
    const int n = s.rows();
    const int d = s.cols();
    if (m.dim() != n) throw std::invalid_argument("congruence: dimension mismatch");
    SymMatrix out(d);
    for (int j = 0; j < d; ++j) {
        for (int k = j; k < d; ++k) {
            double acc = 0.0;
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) acc += s(a, j) * m(a, b) * s(b, k);
            out.set(j, k, acc);
        }
    }
    return out;
}

/// S S^T (n x n) for an n x d matrix S.
inline SymMatrix outer_gram(const SmallMat& s) {
    SymMatrix out(s.rows());
    for (int i = 0; i < s.rows(); ++i)
        for (int j = i; j < s.rows(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < s.cols(); ++k) acc += s(i, k) * s(j, k);
            out.set(i, j, acc);
        }
    return out;
}

/// S^T S (d x d) for an n x d matrix S.
inline SymMatrix inner_gram(const SmallMat& s) {
    SymMatrix out(s.cols());
    for (int i = 0; i < s.cols(); ++i)
        for (int j = i; j < s.cols(); ++j) {
            double acc = 0.0;
            for (int k = 0; k < s.rows(); ++k) acc += s(k, i) * s(k, j);
            out.set(i, j, acc);
        }
    return out;
}

}  // namespace gexpect
