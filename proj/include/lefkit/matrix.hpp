#ifndef LEFKIT_MATRIX_HPP
#define LEFKIT_MATRIX_HPP

#include "lefkit/rational.hpp"

#include <cstddef>
#include <initializer_list>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lefkit {

/// Dense exact rational matrix, row-major.
class QMatrix {
public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
    QMatrix(std::initializer_list<std::initializer_list<Q>> rows)
    {
        rows_ = rows.size();
        cols_ = rows_ == 0 ? 0 : rows.begin()->size();
        data_.reserve(rows_ * cols_);
        for (const auto& r : rows) {
            if (r.size() != cols_) {
                throw Error("ragged matrix literal");
            }
            data_.insert(data_.end(), r.begin(), r.end());
        }
    }

    static QMatrix identity(std::size_t n, const Q& scale = Q(1))
    {
        QMatrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            m(i, i) = scale;
        }
        return m;
    }

    static QMatrix from_rows(const std::vector<std::vector<Q>>& rows, std::size_t cols_if_empty = 0)
    {
        QMatrix m(rows.size(), rows.empty() ? cols_if_empty : rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) {
                throw Error("ragged matrix rows");
            }
            for (std::size_t j = 0; j < m.cols_; ++j) {
                m(i, j) = rows[i][j];
            }
        }
        return m;
    }

    static QMatrix from_columns(const std::vector<std::vector<Q>>& cols, std::size_t rows_if_empty = 0)
    {
        QMatrix m(cols.empty() ? rows_if_empty : cols.front().size(), cols.size());
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (cols[j].size() != m.rows_) {
                throw Error("ragged matrix columns");
            }
            for (std::size_t i = 0; i < m.rows_; ++i) {
                m(i, j) = cols[j][i];
            }
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }
    bool empty() const { return rows_ == 0 || cols_ == 0; }

    Q& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const Q& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::vector<Q> column(std::size_t j) const
    {
        std::vector<Q> c(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            c[i] = (*this)(i, j);
        }
        return c;
    }

    std::vector<Q> row(std::size_t i) const
    {
        return {data_.begin() + static_cast<std::ptrdiff_t>(i * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols_)};
    }

    bool is_zero() const
    {
        for (const auto& q : data_) {
            if (!lefkit::is_zero(q)) {
                return false;
            }
        }
        return true;
    }

    friend bool operator==(const QMatrix& a, const QMatrix& b)
    {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    QMatrix transpose() const
    {
        QMatrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                t(j, i) = (*this)(i, j);
            }
        }
        return t;
    }

    Q trace() const
    {
        if (!square()) {
            throw Error("trace of non-square matrix");
        }
        Q t = 0;
        for (std::size_t i = 0; i < rows_; ++i) {
            t += (*this)(i, i);
        }
        return t;
    }

    QMatrix select_columns(const std::vector<std::size_t>& idx) const
    {
        QMatrix m(rows_, idx.size());
        for (std::size_t j = 0; j < idx.size(); ++j) {
            for (std::size_t i = 0; i < rows_; ++i) {
                m(i, j) = (*this)(i, idx[j]);
            }
        }
        return m;
    }

    QMatrix select_rows(const std::vector<std::size_t>& idx) const
    {
        QMatrix m(idx.size(), cols_);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                m(i, j) = (*this)(idx[i], j);
            }
        }
        return m;
    }

    /// Copies `block` into this matrix with its top-left corner at (r0, c0).
    void set_block(std::size_t r0, std::size_t c0, const QMatrix& block)
    {
        for (std::size_t i = 0; i < block.rows(); ++i) {
            for (std::size_t j = 0; j < block.cols(); ++j) {
                (*this)(r0 + i, c0 + j) = block(i, j);
            }
        }
    }

    /// Adds `block` into this matrix at (r0, c0).
    void add_block(std::size_t r0, std::size_t c0, const QMatrix& block, const Q& scale = Q(1))
    {
        for (std::size_t i = 0; i < block.rows(); ++i) {
            for (std::size_t j = 0; j < block.cols(); ++j) {
                if (!lefkit::is_zero(block(i, j))) {
                    (*this)(r0 + i, c0 + j) += scale * block(i, j);
                }
            }
        }
    }

    QMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const
    {
        QMatrix m(nr, nc);
        for (std::size_t i = 0; i < nr; ++i) {
            for (std::size_t j = 0; j < nc; ++j) {
                m(i, j) = (*this)(r0 + i, c0 + j);
            }
        }
        return m;
    }

    QMatrix& operator+=(const QMatrix& o)
    {
        require_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] += o.data_[k];
        }
        return *this;
    }

    QMatrix& operator-=(const QMatrix& o)
    {
        require_same_shape(o);
        for (std::size_t k = 0; k < data_.size(); ++k) {
            data_[k] -= o.data_[k];
        }
        return *this;
    }

    QMatrix& operator*=(const Q& s)
    {
        for (auto& q : data_) {
            q *= s;
        }
        return *this;
    }

    friend QMatrix operator+(QMatrix a, const QMatrix& b) { return a += b; }
    friend QMatrix operator-(QMatrix a, const QMatrix& b) { return a -= b; }
    friend QMatrix operator*(QMatrix a, const Q& s) { return a *= s; }
    friend QMatrix operator*(const Q& s, QMatrix a) { return a *= s; }

    friend QMatrix operator*(const QMatrix& a, const QMatrix& b)
    {
        if (a.cols_ != b.rows_) {
            throw Error("matrix product shape mismatch: " + a.shape() + " * " + b.shape());
        }
        QMatrix c(a.rows_, b.cols_);
        for (std::size_t i = 0; i < a.rows_; ++i) {
            for (std::size_t k = 0; k < a.cols_; ++k) {
                const Q& aik = a(i, k);
                if (lefkit::is_zero(aik)) {
                    continue;
                }
                for (std::size_t j = 0; j < b.cols_; ++j) {
                    if (!lefkit::is_zero(b(k, j))) {
                        c(i, j) += aik * b(k, j);
                    }
                }
            }
        }
        return c;
    }

    std::vector<Q> apply(const std::vector<Q>& v) const
    {
        if (v.size() != cols_) {
            throw Error("matrix-vector shape mismatch");
        }
        std::vector<Q> out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            for (std::size_t j = 0; j < cols_; ++j) {
                if (!lefkit::is_zero((*this)(i, j)) && !lefkit::is_zero(v[j])) {
                    out[i] += (*this)(i, j) * v[j];
                }
            }
        }
        return out;
    }

    std::string shape() const { return std::to_string(rows_) + "x" + std::to_string(cols_); }

    std::vector<std::vector<Q>> to_rows() const
    {
        std::vector<std::vector<Q>> r;
        r.reserve(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            r.push_back(row(i));
        }
        return r;
    }

private:
    void require_same_shape(const QMatrix& o) const
    {
        if (rows_ != o.rows_ || cols_ != o.cols_) {
            throw Error("matrix shape mismatch: " + shape() + " vs " + o.shape());
        }
    }

    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Q> data_;
};

inline QMatrix hstack(const QMatrix& a, const QMatrix& b)
{
    if (a.rows() != b.rows()) {
        throw Error("hstack row mismatch");
    }
    QMatrix m(a.rows(), a.cols() + b.cols());
    m.set_block(0, 0, a);
    m.set_block(0, a.cols(), b);
    return m;
}

inline QMatrix direct_sum(const QMatrix& a, const QMatrix& b)
{
    QMatrix m(a.rows() + b.rows(), a.cols() + b.cols());
    m.set_block(0, 0, a);
    m.set_block(a.rows(), a.cols(), b);
    return m;
}

inline QMatrix kronecker(const QMatrix& a, const QMatrix& b)
{
    QMatrix m(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            if (!is_zero(a(i, j))) {
                m.add_block(i * b.rows(), j * b.cols(), b, a(i, j));
            }
        }
    }
    return m;
}

struct RowEchelon {
    QMatrix reduced;                   ///< reduced row echelon form
    std::vector<std::size_t> pivots;   ///< pivot column of each nonzero row
};

/// Gauss-Jordan elimination to reduced row echelon form. Zero entries are skipped,
/// which keeps boundary-type matrices cheap.
inline RowEchelon rref(QMatrix m)
{
    RowEchelon out;
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    std::size_t r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t pivot = rows;
        for (std::size_t i = r; i < rows; ++i) {
            if (!is_zero(m(i, c))) {
                pivot = i;
                break;
            }
        }
        if (pivot == rows) {
            continue;
        }
        if (pivot != r) {
            for (std::size_t j = c; j < cols; ++j) {
                std::swap(m(pivot, j), m(r, j));
            }
        }
        Q inv = 1 / m(r, c);
        if (inv != 1) {
            for (std::size_t j = c; j < cols; ++j) {
                if (!is_zero(m(r, j))) {
                    m(r, j) *= inv;
                }
            }
        }
        std::vector<std::size_t> nz;
        for (std::size_t j = c; j < cols; ++j) {
            if (!is_zero(m(r, j))) {
                nz.push_back(j);
            }
        }
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || is_zero(m(i, c))) {
                continue;
            }
            Q factor = m(i, c);
            for (std::size_t j : nz) {
                m(i, j) -= factor * m(r, j);
            }
        }
        out.pivots.push_back(c);
        ++r;
    }
    out.reduced = std::move(m);
    return out;
}

inline std::size_t rank(const QMatrix& m)
{
    if (m.empty()) {
        return 0;
    }
    return rref(m).pivots.size();
}

/// Columns form a basis of the null space of m.
inline QMatrix kernel_basis(const QMatrix& m)
{
    const std::size_t n = m.cols();
    if (m.rows() == 0) {
        return QMatrix::identity(n);
    }
    RowEchelon e = rref(m);
    std::vector<bool> is_pivot(n, false);
    for (auto p : e.pivots) {
        is_pivot[p] = true;
    }
    std::vector<std::size_t> free_cols;
    for (std::size_t j = 0; j < n; ++j) {
        if (!is_pivot[j]) {
            free_cols.push_back(j);
        }
    }
    QMatrix k(n, free_cols.size());
    for (std::size_t f = 0; f < free_cols.size(); ++f) {
        const std::size_t fc = free_cols[f];
        k(fc, f) = 1;
        for (std::size_t r = 0; r < e.pivots.size(); ++r) {
            if (!is_zero(e.reduced(r, fc))) {
                k(e.pivots[r], f) = -e.reduced(r, fc);
            }
        }
    }
    return k;
}

/// Indices of a maximal linearly independent prefix-greedy set of columns.
inline std::vector<std::size_t> independent_columns(const QMatrix& m)
{
    if (m.rows() == 0) {
        return {};
    }
    return rref(m).pivots;
}

/// Columns form a basis of the column space (a subset of m's own columns).
inline QMatrix column_space_basis(const QMatrix& m)
{
    return m.select_columns(independent_columns(m));
}

/// Solves a x = b exactly; nullopt when inconsistent. Free variables are set to zero.
inline std::optional<std::vector<Q>> solve(const QMatrix& a, const std::vector<Q>& b)
{
    if (b.size() != a.rows()) {
        throw Error("solve: right-hand side length mismatch");
    }
    QMatrix aug(a.rows(), a.cols() + 1);
    aug.set_block(0, 0, a);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        aug(i, a.cols()) = b[i];
    }
    RowEchelon e = rref(aug);
    std::vector<Q> x(a.cols());
    for (std::size_t r = 0; r < e.pivots.size(); ++r) {
        if (e.pivots[r] == a.cols()) {
            return std::nullopt;
        }
        x[e.pivots[r]] = e.reduced(r, a.cols());
    }
    return x;
}

/// Solves a X = b column by column; nullopt if any column is inconsistent.
inline std::optional<QMatrix> solve(const QMatrix& a, const QMatrix& b)
{
    if (b.rows() != a.rows()) {
        throw Error("solve: right-hand side shape mismatch");
    }
    QMatrix aug = hstack(a, b);
    RowEchelon e = rref(aug);
    QMatrix x(a.cols(), b.cols());
    for (std::size_t r = 0; r < e.pivots.size(); ++r) {
        if (e.pivots[r] >= a.cols()) {
            return std::nullopt;
        }
        for (std::size_t j = 0; j < b.cols(); ++j) {
            x(e.pivots[r], j) = e.reduced(r, a.cols() + j);
        }
    }
    return x;
}

inline std::optional<QMatrix> inverse(const QMatrix& m)
{
    if (!m.square()) {
        throw Error("inverse of non-square matrix");
    }
    const std::size_t n = m.rows();
    RowEchelon e = rref(hstack(m, QMatrix::identity(n)));
    if (e.pivots.size() < n || (n > 0 && e.pivots[n - 1] != n - 1)) {
        return std::nullopt;
    }
    return e.reduced.block(0, n, n, n);
}

inline Q determinant(QMatrix m)
{
    if (!m.square()) {
        throw Error("determinant of non-square matrix");
    }
    const std::size_t n = m.rows();
    Q det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t pivot = n;
        for (std::size_t i = c; i < n; ++i) {
            if (!is_zero(m(i, c))) {
                pivot = i;
                break;
            }
        }
        if (pivot == n) {
            return 0;
        }
        if (pivot != c) {
            for (std::size_t j = 0; j < n; ++j) {
                std::swap(m(pivot, j), m(c, j));
            }
            det = -det;
        }
        det *= m(c, c);
        for (std::size_t i = c + 1; i < n; ++i) {
            if (is_zero(m(i, c))) {
                continue;
            }
            Q f = m(i, c) / m(c, c);
            for (std::size_t j = c; j < n; ++j) {
                m(i, j) -= f * m(c, j);
            }
        }
    }
    return det;
}

/// True when every column of `vectors` lies in the column span of `basis`.
inline bool in_span(const QMatrix& basis, const QMatrix& vectors)
{
    if (vectors.cols() == 0) {
        return true;
    }
    if (basis.cols() == 0) {
        return vectors.is_zero();
    }
    return rank(hstack(basis, vectors)) == rank(basis);
}

/// Characteristic polynomial det(t I - m), coefficients low to high (monic).
inline std::vector<Q> characteristic_coefficients(const QMatrix& m)
{
    if (!m.square()) {
        throw Error("characteristic polynomial of non-square matrix");
    }
    // Faddeev-LeVerrier: exact over the rationals.
    const std::size_t n = m.rows();
    std::vector<Q> c(n + 1);
    c[n] = 1;
    QMatrix mk(n, n);
    for (std::size_t k = 1; k <= n; ++k) {
        QMatrix next = m * mk;
        for (std::size_t i = 0; i < n; ++i) {
            next(i, i) += c[n - k + 1];
        }
        mk = std::move(next);
        QMatrix am = m * mk;
        c[n - k] = -am.trace() / Q(static_cast<long>(k));
    }
    return c;
}

}  // namespace lefkit

#endif
