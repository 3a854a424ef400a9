/**
 * Sparse exact rational matrices and the linear algebra built on them:
 * ranks, kernels, images, linear solves, quotient spaces, cohomology of
 * cochain complex segments and exactness of sequences of linear maps.
 *
 * Rows are stored as column-sorted lists of nonzero entries.
 */

#ifndef MGC_QMATRIX_HPP
#define MGC_QMATRIX_HPP

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include "mgc/rational.hpp"

namespace mgc {

using QVector = std::vector<Rational>;

/**
 * A sparse vector: (index, value) pairs sorted by index, no zero values.
 */
using SparseVector = std::vector<std::pair<std::size_t, Rational> >;

SparseVector toSparse(const QVector& v);
QVector toDense(const SparseVector& v, std::size_t dim);

class QMatrix
{
    public:
        struct Entry
        {
            std::size_t col;
            Rational value;
        };
        using Row = std::vector<Entry>;

        QMatrix() = default;
        QMatrix(std::size_t rows, std::size_t cols);

        static QMatrix identity(std::size_t n);
        static QMatrix fromColumns(std::size_t rows, const std::vector<QVector>& columns);
        static QMatrix fromRows(std::size_t cols, const std::vector<QVector>& rows);
        static QMatrix hstack(const QMatrix& left, const QMatrix& right);
        static QMatrix vstack(const QMatrix& top, const QMatrix& bottom);
        static QMatrix blockDiagonal(const std::vector<QMatrix>& blocks);

        std::size_t rows() const { return rows_; }
        std::size_t cols() const { return cols_; }

        Rational get(std::size_t r, std::size_t c) const;
        void set(std::size_t r, std::size_t c, const Rational& value);
        void add(std::size_t r, std::size_t c, const Rational& value);
        const Row& row(std::size_t r) const { return data_[r]; }

        bool isZero() const;
        std::size_t nonzeros() const;

        QMatrix transpose() const;
        QMatrix operator*(const QMatrix& other) const;
        QMatrix operator+(const QMatrix& other) const;
        QMatrix operator-(const QMatrix& other) const;
        QMatrix scaled(const Rational& factor) const;
        QVector apply(const QVector& v) const;
        QVector column(std::size_t c) const;

        QMatrix selectRows(const std::vector<std::size_t>& indices) const;
        QMatrix selectColumns(const std::vector<std::size_t>& indices) const;

        /**
         * First nonzero entry of this - other in row-major order, if any.
         */
        std::optional<std::pair<std::size_t, std::size_t> > firstDifference(const QMatrix& other) const;

        bool operator==(const QMatrix& other) const;
        bool operator!=(const QMatrix& other) const { return !(*this == other); }

    private:
        std::size_t rows_ = 0;
        std::size_t cols_ = 0;
        std::vector<Row> data_;
};

/**
 * Incremental row echelon form over the rationals.
 *
 * Each inserted vector is reduced against the stored pivot rows; if a
 * nonzero residue remains it becomes a new pivot row with leading entry 1.
 * Optionally tracks, for every stored row, the combination of inserted
 * vectors it came from, which lets reduce() express vectors in the span.
 */
class Echelon
{
    public:
        explicit Echelon(std::size_t dim, bool track = false);

        std::size_t dim() const { return dim_; }
        std::size_t rank() const { return pivots_.size(); }

        /**
         * Insert a vector; returns true if it was independent of the
         * previously inserted ones.
         */
        bool insert(const SparseVector& v);

        /**
         * Residue of v after eliminating every pivot coordinate.  When
         * tracking, combination receives coefficients c with
         * v = residue + sum_k c_k * inserted_k.
         */
        SparseVector reduce(const SparseVector& v, SparseVector* combination = nullptr) const;

        bool contains(const SparseVector& v) const { return reduce(v).empty(); }

        std::vector<std::size_t> pivotColumns() const;

        /**
         * Stored rows brought to reduced row echelon form, keyed by pivot.
         */
        std::map<std::size_t, SparseVector> reducedRows() const;

    private:
        struct PivotRow
        {
            SparseVector row;
            SparseVector combo;
        };

        std::size_t dim_;
        bool track_;
        std::size_t inserted_ = 0;
        std::map<std::size_t, PivotRow> pivots_;
};

/**
 * Rank by fraction-free elimination: rows are scaled to primitive integer
 * vectors and combined as a*r - b*p followed by content division.
 */
std::size_t rank(const QMatrix& m);

/**
 * Kernel basis: one vector per free column (ascending), with that free
 * coordinate equal to 1 and the other free coordinates 0.
 */
std::vector<QVector> kernelBasis(const QMatrix& m);

/**
 * Basis of the column space: the first maximal independent set of columns.
 */
std::vector<QVector> imageBasis(const QMatrix& m);

/**
 * Some x with m x = b (free coordinates zero), or nothing.
 */
std::optional<QVector> solve(const QMatrix& m, const QVector& b);

/**
 * True if m is square and invertible.
 */
bool isInvertible(const QMatrix& m);

/**
 * Inverse of an invertible square matrix; throws Error("Singular") otherwise.
 */
QMatrix inverse(const QMatrix& m);

/**
 * Coordinates with respect to a fixed list of independent vectors.
 */
class SpanCoordinates
{
    public:
        SpanCoordinates(std::size_t dim, const std::vector<QVector>& basis);

        std::size_t size() const { return size_; }

        /**
         * Coefficients c with v = sum c_k basis_k, or nothing if v is not
         * in the span.
         */
        std::optional<QVector> coordinates(const QVector& v) const;

    private:
        std::size_t size_;
        Echelon echelon_;
};

/**
 * The quotient of Q^dim by the span of some relation vectors.  The basis
 * of the quotient is the set of non-pivot coordinates of the relations'
 * reduced echelon form, in ascending order.
 */
class QuotientSpace
{
    public:
        QuotientSpace(std::size_t dim, const std::vector<SparseVector>& relations);

        std::size_t ambientDim() const { return dim_; }
        std::size_t dim() const { return basis_.size(); }

        /**
         * Ambient coordinates chosen as representatives of the quotient basis.
         */
        const std::vector<std::size_t>& basisCoordinates() const { return basis_; }

        /**
         * Coordinates of the class of v in the quotient basis.
         */
        QVector project(const SparseVector& v) const;

    private:
        std::size_t dim_;
        Echelon echelon_;
        std::vector<std::size_t> basis_;
        std::vector<std::size_t> position_;
};

/**
 * A finite segment of a cochain complex: d[i] maps degree i to degree i+1.
 */
struct ComplexSegment
{
    std::vector<std::size_t> dims;
    std::vector<QMatrix> d;
};

/**
 * Throws Error("NotAComplex") naming the first offending entry if some
 * consecutive composite is nonzero, and Error("DimensionMismatch") if the
 * shapes do not line up.
 */
void checkComplex(const ComplexSegment& seg);

/**
 * dim H^i = nullity(d^i) - rank(d^{i-1}) for every i with d^i present.
 */
std::vector<std::size_t> cohomologyDims(const ComplexSegment& seg);

struct ExactnessVerdict
{
    bool exact = true;
    std::size_t failingPosition = 0;
    std::string reason;
};

/**
 * Exactness of V_0 -> V_1 -> ... -> V_k along the given maps.  Position i
 * is the space V_i.  If leftZero, injectivity of the first map is demanded;
 * if rightZero, surjectivity of the last map is demanded.
 */
ExactnessVerdict isExactSequence(const std::vector<QMatrix>& maps, bool leftZero, bool rightZero);

}   // namespace mgc

#endif
