/**
 * Sparse exact rational linear algebra.
 */

#include "mgc/qmatrix.hpp"

#include <algorithm>
#include <sstream>
#include "mgc/error.hpp"

namespace mgc {

Rational parseRational(const std::string& text)
{
    auto fail = [&]() { return Error("ParseError", "not a rational number: '" + text + "'"); };
    auto slash = text.find('/');
    std::string num = text.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : text.substr(slash + 1);
    auto isInteger = [](const std::string& s, bool allowSign) {
        std::size_t start = allowSign && !s.empty() && (s[0] == '-' || s[0] == '+') ? 1 : 0;
        if (s.size() == start)
            return false;
        for (std::size_t i = start; i < s.size(); ++i)
            if (s[i] < '0' || s[i] > '9')
                return false;
        return true;
    };
    if (!isInteger(num, true) || !isInteger(den, false))
        throw fail();
    Integer d(den);
    if (d == 0)
        throw fail();
    return Rational(Integer(num[0] == '+' ? num.substr(1) : num), d);
}

std::string formatRational(const Rational& value)
{
    return value.str();
}

SparseVector toSparse(const QVector& v)
{
    SparseVector out;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (v[i] != 0)
            out.emplace_back(i, v[i]);
    }
    return out;
}

QVector toDense(const SparseVector& v, std::size_t dim)
{
    QVector out(dim);
    for (const auto& [i, x] : v)
        out[i] = x;
    return out;
}

namespace {

/**
 * a - factor * b for sorted sparse vectors.
 */
SparseVector axpy(const SparseVector& a, const Rational& factor, const SparseVector& b)
{
    SparseVector out;
    out.reserve(a.size() + b.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < a.size() || j < b.size())
    {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first))
        {
            out.push_back(a[i++]);
        }
        else if (i == a.size() || b[j].first < a[i].first)
        {
            out.emplace_back(b[j].first, -factor * b[j].second);
            ++j;
        }
        else
        {
            Rational x = a[i].second - factor * b[j].second;
            if (x != 0)
                out.emplace_back(a[i].first, std::move(x));
            ++i;
            ++j;
        }
    }
    return out;
}

}   // namespace

QMatrix::QMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows)
{
}

QMatrix QMatrix::identity(std::size_t n)
{
    QMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m.data_[i].push_back({i, Rational(1)});
    return m;
}

QMatrix QMatrix::fromColumns(std::size_t rows, const std::vector<QVector>& columns)
{
    QMatrix m(rows, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c)
    {
        for (std::size_t r = 0; r < rows; ++r)
        {
            if (columns[c][r] != 0)
                m.data_[r].push_back({c, columns[c][r]});
        }
    }
    return m;
}

QMatrix QMatrix::fromRows(std::size_t cols, const std::vector<QVector>& rows)
{
    QMatrix m(rows.size(), cols);
    for (std::size_t r = 0; r < rows.size(); ++r)
    {
        for (std::size_t c = 0; c < cols; ++c)
        {
            if (rows[r][c] != 0)
                m.data_[r].push_back({c, rows[r][c]});
        }
    }
    return m;
}

QMatrix QMatrix::hstack(const QMatrix& left, const QMatrix& right)
{
    if (left.rows_ != right.rows_)
        throw Error("DimensionMismatch", "hstack of matrices with different row counts");
    QMatrix m(left.rows_, left.cols_ + right.cols_);
    for (std::size_t r = 0; r < left.rows_; ++r)
    {
        m.data_[r] = left.data_[r];
        for (const Entry& e : right.data_[r])
            m.data_[r].push_back({e.col + left.cols_, e.value});
    }
    return m;
}

QMatrix QMatrix::vstack(const QMatrix& top, const QMatrix& bottom)
{
    if (top.cols_ != bottom.cols_)
        throw Error("DimensionMismatch", "vstack of matrices with different column counts");
    QMatrix m(top.rows_ + bottom.rows_, top.cols_);
    std::copy(top.data_.begin(), top.data_.end(), m.data_.begin());
    std::copy(bottom.data_.begin(), bottom.data_.end(), m.data_.begin() + top.rows_);
    return m;
}

QMatrix QMatrix::blockDiagonal(const std::vector<QMatrix>& blocks)
{
    std::size_t rows = 0;
    std::size_t cols = 0;
    for (const QMatrix& b : blocks)
    {
        rows += b.rows_;
        cols += b.cols_;
    }
    QMatrix m(rows, cols);
    std::size_t r0 = 0;
    std::size_t c0 = 0;
    for (const QMatrix& b : blocks)
    {
        for (std::size_t r = 0; r < b.rows_; ++r)
        {
            for (const Entry& e : b.data_[r])
                m.data_[r0 + r].push_back({e.col + c0, e.value});
        }
        r0 += b.rows_;
        c0 += b.cols_;
    }
    return m;
}

Rational QMatrix::get(std::size_t r, std::size_t c) const
{
    const Row& row = data_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const Entry& e, std::size_t col) { return e.col < col; });
    if (it != row.end() && it->col == c)
        return it->value;
    return Rational(0);
}

void QMatrix::set(std::size_t r, std::size_t c, const Rational& value)
{
    if (r >= rows_ || c >= cols_)
        throw Error("DimensionMismatch", "matrix index out of range");
    Row& row = data_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const Entry& e, std::size_t col) { return e.col < col; });
    if (it != row.end() && it->col == c)
    {
        if (value == 0)
            row.erase(it);
        else
            it->value = value;
    }
    else if (value != 0)
    {
        row.insert(it, {c, value});
    }
}

void QMatrix::add(std::size_t r, std::size_t c, const Rational& value)
{
    if (value == 0)
        return;
    if (r >= rows_ || c >= cols_)
        throw Error("DimensionMismatch", "matrix index out of range");
    Row& row = data_[r];
    auto it = std::lower_bound(row.begin(), row.end(), c,
                               [](const Entry& e, std::size_t col) { return e.col < col; });
    if (it != row.end() && it->col == c)
    {
        it->value += value;
        if (it->value == 0)
            row.erase(it);
    }
    else
    {
        row.insert(it, {c, value});
    }
}

bool QMatrix::isZero() const
{
    for (const Row& row : data_)
    {
        if (!row.empty())
            return false;
    }
    return true;
}

std::size_t QMatrix::nonzeros() const
{
    std::size_t n = 0;
    for (const Row& row : data_)
        n += row.size();
    return n;
}

QMatrix QMatrix::transpose() const
{
    QMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
    {
        for (const Entry& e : data_[r])
            t.data_[e.col].push_back({r, e.value});
    }
    return t;
}

QMatrix QMatrix::operator*(const QMatrix& other) const
{
    if (cols_ != other.rows_)
        throw Error("DimensionMismatch", "matrix product of incompatible shapes");
    QMatrix m(rows_, other.cols_);
    std::vector<Rational> acc(other.cols_);
    std::vector<char> touched(other.cols_, 0);
    std::vector<std::size_t> used;
    for (std::size_t r = 0; r < rows_; ++r)
    {
        used.clear();
        for (const Entry& a : data_[r])
        {
            for (const Entry& b : other.data_[a.col])
            {
                if (!touched[b.col])
                {
                    touched[b.col] = 1;
                    used.push_back(b.col);
                    acc[b.col] = 0;
                }
                acc[b.col] += a.value * b.value;
            }
        }
        std::sort(used.begin(), used.end());
        for (std::size_t c : used)
        {
            if (acc[c] != 0)
                m.data_[r].push_back({c, acc[c]});
            touched[c] = 0;
        }
    }
    return m;
}

QMatrix QMatrix::operator+(const QMatrix& other) const
{
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw Error("DimensionMismatch", "sum of matrices of different shapes");
    QMatrix m = *this;
    for (std::size_t r = 0; r < rows_; ++r)
    {
        for (const Entry& e : other.data_[r])
            m.add(r, e.col, e.value);
    }
    return m;
}

QMatrix QMatrix::operator-(const QMatrix& other) const
{
    return *this + other.scaled(Rational(-1));
}

QMatrix QMatrix::scaled(const Rational& factor) const
{
    if (factor == 0)
        return QMatrix(rows_, cols_);
    QMatrix m = *this;
    for (Row& row : m.data_)
    {
        for (Entry& e : row)
            e.value *= factor;
    }
    return m;
}

QVector QMatrix::apply(const QVector& v) const
{
    if (v.size() != cols_)
        throw Error("DimensionMismatch", "matrix-vector product of incompatible shapes");
    QVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
    {
        for (const Entry& e : data_[r])
            out[r] += e.value * v[e.col];
    }
    return out;
}

QVector QMatrix::column(std::size_t c) const
{
    QVector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        out[r] = get(r, c);
    return out;
}

QMatrix QMatrix::selectRows(const std::vector<std::size_t>& indices) const
{
    QMatrix m(indices.size(), cols_);
    for (std::size_t i = 0; i < indices.size(); ++i)
        m.data_[i] = data_[indices[i]];
    return m;
}

QMatrix QMatrix::selectColumns(const std::vector<std::size_t>& indices) const
{
    std::vector<std::size_t> position(cols_, static_cast<std::size_t>(-1));
    for (std::size_t i = 0; i < indices.size(); ++i)
        position[indices[i]] = i;
    QMatrix m(rows_, indices.size());
    for (std::size_t r = 0; r < rows_; ++r)
    {
        for (const Entry& e : data_[r])
        {
            if (position[e.col] != static_cast<std::size_t>(-1))
                m.add(r, position[e.col], e.value);
        }
    }
    return m;
}

std::optional<std::pair<std::size_t, std::size_t> > QMatrix::firstDifference(const QMatrix& other) const
{
    QMatrix diff = *this - other;
    for (std::size_t r = 0; r < rows_; ++r)
    {
        if (!diff.data_[r].empty())
            return std::make_pair(r, diff.data_[r].front().col);
    }
    return std::nullopt;
}

bool QMatrix::operator==(const QMatrix& other) const
{
    if (rows_ != other.rows_ || cols_ != other.cols_)
        return false;
    for (std::size_t r = 0; r < rows_; ++r)
    {
        const Row& a = data_[r];
        const Row& b = other.data_[r];
        if (a.size() != b.size())
            return false;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            if (a[i].col != b[i].col || a[i].value != b[i].value)
                return false;
        }
    }
    return true;
}

/* ------------------------------------------------------------------ */

Echelon::Echelon(std::size_t dim, bool track)
    : dim_(dim), track_(track)
{
}

SparseVector Echelon::reduce(const SparseVector& v, SparseVector* combination) const
{
    SparseVector residue = v;
    SparseVector combo;
    std::size_t from = 0;
    while (true)
    {
        // Smallest coordinate of the residue that is a pivot column.
        auto it = std::find_if(residue.begin() + static_cast<std::ptrdiff_t>(std::min(from, residue.size())),
                               residue.end(),
                               [&](const auto& entry) { return pivots_.count(entry.first) > 0; });
        if (it == residue.end())
            break;
        std::size_t col = it->first;
        Rational factor = it->second;
        const PivotRow& p = pivots_.at(col);
        std::size_t offset = static_cast<std::size_t>(it - residue.begin());
        residue = axpy(residue, factor, p.row);
        if (track_)
            combo = axpy(combo, -factor, p.combo);
        from = offset;
    }
    if (combination)
        *combination = std::move(combo);
    return residue;
}

bool Echelon::insert(const SparseVector& v)
{
    std::size_t index = inserted_++;
    SparseVector combo;
    SparseVector residue = reduce(v, track_ ? &combo : nullptr);
    if (residue.empty())
        return false;
    Rational lead = residue.front().second;
    for (auto& entry : residue)
        entry.second /= lead;
    PivotRow p;
    p.row = std::move(residue);
    if (track_)
    {
        // residue = v - combo.inserted, so the row is (e_index - combo) / lead.
        SparseVector unit = {{index, Rational(1)}};
        SparseVector c = axpy(unit, Rational(1), combo);
        for (auto& entry : c)
            entry.second /= lead;
        p.combo = std::move(c);
    }
    std::size_t col = p.row.front().first;
    pivots_.emplace(col, std::move(p));
    return true;
}

std::vector<std::size_t> Echelon::pivotColumns() const
{
    std::vector<std::size_t> cols;
    for (const auto& [c, row] : pivots_)
        cols.push_back(c);
    return cols;
}

std::map<std::size_t, SparseVector> Echelon::reducedRows() const
{
    std::map<std::size_t, SparseVector> rows;
    for (auto it = pivots_.rbegin(); it != pivots_.rend(); ++it)
    {
        SparseVector row = it->second.row;
        // Clear later pivot columns using the already reduced rows.
        bool changed = true;
        while (changed)
        {
            changed = false;
            for (std::size_t k = 1; k < row.size(); ++k)
            {
                auto found = rows.find(row[k].first);
                if (found != rows.end())
                {
                    row = axpy(row, row[k].second, found->second);
                    changed = true;
                    break;
                }
            }
        }
        rows.emplace(it->first, std::move(row));
    }
    return rows;
}

/* ------------------------------------------------------------------ */

namespace {

using IntVector = std::vector<std::pair<std::size_t, Integer> >;

IntVector primitive(IntVector v)
{
    if (v.empty())
        return v;
    Integer g = 0;
    for (const auto& entry : v)
    {
        g = boost::multiprecision::gcd(g, entry.second);
        if (g == 1)
            break;
    }
    if (v.front().second < 0)
        g = -g;
    if (g != 1)
    {
        for (auto& entry : v)
            entry.second /= g;
    }
    return v;
}

IntVector integerRow(const QMatrix::Row& row)
{
    Integer l = 1;
    for (const auto& e : row)
        l = boost::multiprecision::lcm(l, boost::multiprecision::denominator(e.value));
    IntVector out;
    out.reserve(row.size());
    for (const auto& e : row)
        out.emplace_back(e.col, boost::multiprecision::numerator(e.value) * (l / boost::multiprecision::denominator(e.value)));
    return primitive(std::move(out));
}

/**
 * a * r - b * p where a, b are the leading coefficients at p's pivot.
 */
IntVector combine(const IntVector& r, const Integer& a, const IntVector& p, const Integer& b)
{
    IntVector out;
    out.reserve(r.size() + p.size());
    std::size_t i = 0;
    std::size_t j = 0;
    while (i < r.size() || j < p.size())
    {
        if (j == p.size() || (i < r.size() && r[i].first < p[j].first))
        {
            out.emplace_back(r[i].first, a * r[i].second);
            ++i;
        }
        else if (i == r.size() || p[j].first < r[i].first)
        {
            out.emplace_back(p[j].first, -b * p[j].second);
            ++j;
        }
        else
        {
            Integer x = a * r[i].second - b * p[j].second;
            if (x != 0)
                out.emplace_back(r[i].first, std::move(x));
            ++i;
            ++j;
        }
    }
    return primitive(std::move(out));
}

}   // namespace

std::size_t rank(const QMatrix& m)
{
    std::map<std::size_t, IntVector> pivots;
    for (std::size_t r = 0; r < m.rows(); ++r)
    {
        IntVector row = integerRow(m.row(r));
        while (!row.empty())
        {
            auto it = pivots.find(row.front().first);
            if (it == pivots.end())
                break;
            row = combine(row, it->second.front().second, it->second, row.front().second);
        }
        if (!row.empty())
            pivots.emplace(row.front().first, std::move(row));
    }
    return pivots.size();
}

std::vector<QVector> kernelBasis(const QMatrix& m)
{
    Echelon ech(m.cols());
    for (std::size_t r = 0; r < m.rows(); ++r)
    {
        SparseVector row;
        for (const auto& e : m.row(r))
            row.emplace_back(e.col, e.value);
        ech.insert(row);
    }
    auto rows = ech.reducedRows();
    std::vector<char> isPivot(m.cols(), 0);
    for (const auto& [c, row] : rows)
        isPivot[c] = 1;
    std::vector<QVector> basis;
    for (std::size_t f = 0; f < m.cols(); ++f)
    {
        if (isPivot[f])
            continue;
        QVector v(m.cols());
        v[f] = 1;
        for (const auto& [c, row] : rows)
        {
            for (const auto& [k, x] : row)
            {
                if (k == f)
                    v[c] = -x;
            }
        }
        basis.push_back(std::move(v));
    }
    return basis;
}

std::vector<QVector> imageBasis(const QMatrix& m)
{
    Echelon ech(m.rows());
    std::vector<QVector> basis;
    QMatrix t = m.transpose();
    for (std::size_t c = 0; c < t.rows(); ++c)
    {
        SparseVector col;
        for (const auto& e : t.row(c))
            col.emplace_back(e.col, e.value);
        if (ech.insert(col))
            basis.push_back(toDense(col, m.rows()));
    }
    return basis;
}

std::optional<QVector> solve(const QMatrix& m, const QVector& b)
{
    if (b.size() != m.rows())
        throw Error("DimensionMismatch", "right-hand side has wrong length");
    // Columns of m are the spanning vectors; the coordinates solve m x = b.
    Echelon ech(m.rows(), true);
    QMatrix t = m.transpose();
    for (std::size_t c = 0; c < t.rows(); ++c)
    {
        SparseVector col;
        for (const auto& e : t.row(c))
            col.emplace_back(e.col, e.value);
        ech.insert(col);
    }
    SparseVector combo;
    SparseVector residue = ech.reduce(toSparse(b), &combo);
    if (!residue.empty())
        return std::nullopt;
    return toDense(combo, m.cols());
}

bool isInvertible(const QMatrix& m)
{
    return m.rows() == m.cols() && rank(m) == m.rows();
}

QMatrix inverse(const QMatrix& m)
{
    if (!isInvertible(m))
        throw Error("Singular", "matrix is not invertible");
    std::size_t n = m.rows();
    std::vector<QVector> columns;
    for (std::size_t i = 0; i < n; ++i)
    {
        QVector e(n);
        e[i] = 1;
        columns.push_back(*solve(m, e));
    }
    return QMatrix::fromColumns(n, columns);
}

SpanCoordinates::SpanCoordinates(std::size_t dim, const std::vector<QVector>& basis)
    : size_(basis.size()), echelon_(dim, true)
{
    for (const QVector& v : basis)
    {
        if (!echelon_.insert(toSparse(v)))
            throw Error("DependentBasis", "span basis vectors are linearly dependent");
    }
}

std::optional<QVector> SpanCoordinates::coordinates(const QVector& v) const
{
    SparseVector combo;
    if (!echelon_.reduce(toSparse(v), &combo).empty())
        return std::nullopt;
    return toDense(combo, size_);
}

QuotientSpace::QuotientSpace(std::size_t dim, const std::vector<SparseVector>& relations)
    : dim_(dim), echelon_(dim), position_(dim, static_cast<std::size_t>(-1))
{
    for (const SparseVector& r : relations)
        echelon_.insert(r);
    std::vector<char> isPivot(dim, 0);
    for (std::size_t c : echelon_.pivotColumns())
        isPivot[c] = 1;
    for (std::size_t c = 0; c < dim; ++c)
    {
        if (!isPivot[c])
        {
            position_[c] = basis_.size();
            basis_.push_back(c);
        }
    }
}

QVector QuotientSpace::project(const SparseVector& v) const
{
    QVector out(basis_.size());
    for (const auto& [c, x] : echelon_.reduce(v))
        out[position_[c]] = x;
    return out;
}

/* ------------------------------------------------------------------ */

void checkComplex(const ComplexSegment& seg)
{
    if (seg.dims.size() < seg.d.size() + 1)
        throw Error("DimensionMismatch", "complex segment lists too few dimensions");
    for (std::size_t i = 0; i < seg.d.size(); ++i)
    {
        if (seg.d[i].cols() != seg.dims[i] || seg.d[i].rows() != seg.dims[i + 1])
            throw Error("DimensionMismatch", "differential d^" + std::to_string(i) + " has the wrong shape");
    }
    for (std::size_t i = 0; i + 1 < seg.d.size(); ++i)
    {
        QMatrix dd = seg.d[i + 1] * seg.d[i];
        if (!dd.isZero())
        {
            auto at = dd.firstDifference(QMatrix(dd.rows(), dd.cols()));
            std::ostringstream msg;
            msg << "d^" << i + 1 << " d^" << i << " has nonzero entry at (" << at->first << ", " << at->second << ")";
            throw Error("NotAComplex", msg.str());
        }
    }
}

std::vector<std::size_t> cohomologyDims(const ComplexSegment& seg)
{
    checkComplex(seg);
    std::vector<std::size_t> ranks;
    for (const QMatrix& d : seg.d)
        ranks.push_back(rank(d));
    std::vector<std::size_t> h;
    for (std::size_t i = 0; i < seg.d.size(); ++i)
    {
        std::size_t nullity = seg.dims[i] - ranks[i];
        h.push_back(nullity - (i == 0 ? 0 : ranks[i - 1]));
    }
    return h;
}

ExactnessVerdict isExactSequence(const std::vector<QMatrix>& maps, bool leftZero, bool rightZero)
{
    ExactnessVerdict verdict;
    for (std::size_t i = 0; i + 1 < maps.size(); ++i)
    {
        if (maps[i + 1].cols() != maps[i].rows())
            throw Error("DimensionMismatch", "maps " + std::to_string(i) + " and " + std::to_string(i + 1) + " do not compose");
    }
    if (maps.empty())
        return verdict;
    std::vector<std::size_t> ranks;
    for (const QMatrix& m : maps)
        ranks.push_back(rank(m));
    if (leftZero && ranks.front() != maps.front().cols())
    {
        verdict.exact = false;
        verdict.failingPosition = 0;
        verdict.reason = "first map is not injective";
        return verdict;
    }
    for (std::size_t i = 0; i + 1 < maps.size(); ++i)
    {
        if (!(maps[i + 1] * maps[i]).isZero())
        {
            verdict.exact = false;
            verdict.failingPosition = i + 1;
            verdict.reason = "consecutive composite is nonzero";
            return verdict;
        }
        std::size_t kernel = maps[i + 1].cols() - ranks[i + 1];
        if (kernel != ranks[i])
        {
            verdict.exact = false;
            verdict.failingPosition = i + 1;
            verdict.reason = "image is strictly smaller than kernel";
            return verdict;
        }
    }
    if (rightZero && ranks.back() != maps.back().rows())
    {
        verdict.exact = false;
        verdict.failingPosition = maps.size();
        verdict.reason = "last map is not surjective";
    }
    return verdict;
}

}   // namespace mgc
