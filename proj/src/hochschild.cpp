/**
 * Hochschild complexes, restriction maps and exact sequence checks.
 */

#include "mgc/hochschild.hpp"

#include <set>
#include <sstream>
#include "mgc/error.hpp"

namespace mgc {

namespace {

Rational faceSign(SignConvention c, std::size_t power)
{
    Rational s = (power % 2 == 0) ? Rational(1) : Rational(-1);
    return c == SignConvention::Flipped ? -s : s;
}

/**
 * Calls visit(multi) for every multi-index below the given bounds, the
 * last entry most significant.
 */
template <class Visit>
void forEachMulti(const std::vector<std::size_t>& bounds, Visit visit)
{
    for (std::size_t b : bounds)
        if (b == 0)
            return;
    std::vector<std::size_t> multi(bounds.size(), 0);
    while (true)
    {
        visit(multi);
        std::size_t k = 0;
        while (k < multi.size())
        {
            if (++multi[k] < bounds[k])
                break;
            multi[k] = 0;
            ++k;
        }
        if (k == multi.size())
            return;
    }
}

Simplex makeSimplex(ObjId start, std::vector<MorId> mors)
{
    Simplex s;
    s.start = start;
    s.mors = std::move(mors);
    return s;
}

QMatrix selection(std::size_t dim, const std::vector<std::size_t>& coords)
{
    QMatrix m(dim, coords.size());
    for (std::size_t k = 0; k < coords.size(); ++k)
        m.set(coords[k], k, Rational(1));
    return m;
}

bool sameCategory(const GradedPtr& a, const GradedPtr& b)
{
    return a == b || !structuralDifference(*a, *b);
}

/**
 * The chain map C(𝔞, M) → C(𝔞, N) induced by per-space coefficient maps;
 * both complexes share the category, so their blocks align.
 */
std::vector<QMatrix> coefficientMap(const HochschildComplex& from, const HochschildComplex& to,
                                    const std::vector<QMatrix>& perSpace)
{
    std::vector<QMatrix> out;
    for (std::size_t n = 0; n < from.segment().dims.size(); ++n)
    {
        QMatrix m(to.dim(n), from.dim(n));
        const auto& src = from.blocks(n);
        const auto& tgt = to.blocks(n);
        for (std::size_t b = 0; b < src.size(); ++b)
        {
            const QMatrix& p = perSpace[src[b].target];
            for (std::size_t k = 0; k < src[b].inputs; ++k)
                for (std::size_t r = 0; r < p.rows(); ++r)
                    for (const QMatrix::Entry& e : p.row(r))
                        m.set(tgt[b].offset + k * tgt[b].targetDim + r, src[b].offset + k * src[b].targetDim + e.col,
                              e.value);
        }
        out.push_back(m);
    }
    return out;
}

std::string degreeLabel(const std::string& what, std::size_t n)
{
    return what + " in degree " + std::to_string(n);
}

void requireSameSource(const GradedFunctor& f, const HochschildComplex& c)
{
    if (!sameCategory(f.target(), c.source()))
        throw Error("CoefficientMismatch", "the functor does not land in the complex's category");
}

std::vector<Functor> sharpFamily(const std::vector<GradedFunctor>& family)
{
    std::vector<Functor> out;
    for (const GradedFunctor& f : family)
        out.push_back(f.sharpFunctor());
    return out;
}

/**
 * An n x n invertibility verdict over every degree of a map family.
 */
std::optional<std::size_t> firstNonBijective(const std::vector<QMatrix>& maps)
{
    for (std::size_t n = 0; n < maps.size(); ++n)
        if (maps[n].rows() != maps[n].cols() || !isInvertible(maps[n]))
            return n;
    return std::nullopt;
}

}   // namespace

std::string conventionName(SignConvention c)
{
    return c == SignConvention::Standard ? "standard" : "flipped";
}

/* ------------------------------------------------------------------ */

std::size_t HochschildComplex::blockOf(const Simplex& s) const
{
    auto it = blockIndex_.find({s.start, s.mors});
    return it == blockIndex_.end() ? kNone : it->second;
}

std::size_t HochschildComplex::coordinate(std::size_t n, std::size_t block, const std::vector<std::size_t>& multi,
                                          std::size_t t) const
{
    const CochainBlock& b = blocks_[n][block];
    std::size_t index = 0;
    for (std::size_t k = multi.size(); k-- > 0;)
        index = index * b.factorDims[k] + multi[k];
    return b.offset + index * b.targetDim + t;
}

HochschildComplex buildComplex(const Bimodule& m, std::size_t maxDegree, SignConvention convention)
{
    if (!m.overIdentity() || !sameCategory(m.left(), m.right()))
        throw Error("CoefficientMismatch", "coefficients must be a bimodule over the identity bifunctor");
    HochschildComplex c;
    c.source_ = m.left();
    c.coefficients_ = m;
    c.convention_ = convention;
    c.truncation_ = maxDegree;
    const GradedCat& a = *c.source_;
    const FinCat& sharp = *a.sharp();

    for (std::size_t n = 0; n <= maxDegree + 1; ++n)
    {
        std::vector<CochainBlock> blocks;
        std::size_t offset = 0;
        for (const Simplex& s : nerve(sharp, n))
        {
            CochainBlock b;
            b.simplex = s;
            for (MorId h : s.mors)
            {
                b.factorDims.push_back(a.dim(h));
                b.inputs *= a.dim(h);
            }
            HomId composite = simplexComposite(sharp, s);
            b.target = m.spaceId(a.homMorphism(composite), s.start, simplexVertex(sharp, s, n));
            b.targetDim = m.dim(b.target);
            b.offset = offset;
            offset += b.width();
            c.blockIndex_[{s.start, s.mors}] = blocks.size();
            blocks.push_back(std::move(b));
        }
        c.blocks_.push_back(std::move(blocks));
        c.segment_.dims.push_back(offset);
    }

    for (std::size_t n = 0; n <= maxDegree; ++n)
    {
        QMatrix d(c.segment_.dims[n + 1], c.segment_.dims[n]);
        const Rational left = faceSign(convention, 0);
        const Rational right = faceSign(convention, n + 1);
        for (std::size_t tb = 0; tb < c.blocks_[n + 1].size(); ++tb)
        {
            const CochainBlock& tau = c.blocks_[n + 1][tb];
            const auto& h = tau.simplex.mors;

            // faces of τ as blocks of degree n
            std::size_t leftFace = c.blockOf(makeSimplex(tau.simplex.start, {h.begin(), h.end() - 1}));
            std::size_t rightFace = c.blockOf(makeSimplex(sharp.target(h[0]), {h.begin() + 1, h.end()}));
            std::vector<std::size_t> innerFace(n);
            std::vector<HomId> innerHom(n);
            for (std::size_t i = 0; i < n; ++i)
            {
                std::vector<MorId> mors(h.begin(), h.begin() + i);
                innerHom[i] = sharp.compose(h[i + 1], h[i]);
                mors.push_back(innerHom[i]);
                mors.insert(mors.end(), h.begin() + i + 2, h.end());
                innerFace[i] = c.blockOf(makeSimplex(tau.simplex.start, mors));
            }
            const CochainBlock& lf = c.blocks_[n][leftFace];
            const CochainBlock& rf = c.blocks_[n][rightFace];

            forEachMulti(tau.factorDims, [&](const std::vector<std::size_t>& multi) {
                // a_n · φ(a_{n-1}, ..., a_0)
                if (lf.targetDim > 0)
                {
                    std::vector<std::size_t> sub(multi.begin(), multi.end() - 1);
                    const auto& act = m.leftConstants(h[n], lf.target);
                    for (std::size_t t2 = 0; t2 < lf.targetDim; ++t2)
                    {
                        std::size_t col = c.coordinate(n, leftFace, sub, t2);
                        for (const auto& [t, v] : act[multi[n] * lf.targetDim + t2])
                            d.add(c.coordinate(n + 1, tb, multi, t), col, left * v);
                    }
                }
                // φ(..., a_{i+1}a_i, ...)
                for (std::size_t i = 0; i < n; ++i)
                {
                    const Rational sign = faceSign(convention, n - i);
                    const auto& prod = a.product(h[i + 1], h[i]);
                    std::vector<std::size_t> sub(multi.begin(), multi.begin() + i);
                    sub.push_back(0);
                    sub.insert(sub.end(), multi.begin() + i + 2, multi.end());
                    for (const auto& [k, v] : prod[multi[i + 1] * a.dim(h[i]) + multi[i]])
                    {
                        sub[i] = k;
                        for (std::size_t t = 0; t < tau.targetDim; ++t)
                            d.add(c.coordinate(n + 1, tb, multi, t), c.coordinate(n, innerFace[i], sub, t), sign * v);
                    }
                }
                // φ(a_n, ..., a_1) · a_0
                if (rf.targetDim > 0)
                {
                    std::vector<std::size_t> sub(multi.begin() + 1, multi.end());
                    const auto& act = m.rightConstants(rf.target, h[0]);
                    for (std::size_t t2 = 0; t2 < rf.targetDim; ++t2)
                    {
                        std::size_t col = c.coordinate(n, rightFace, sub, t2);
                        for (const auto& [t, v] : act[t2 * a.dim(h[0]) + multi[0]])
                            d.add(c.coordinate(n + 1, tb, multi, t), col, right * v);
                    }
                }
            });
        }
        c.segment_.d.push_back(std::move(d));
    }
    return c;
}

HochschildComplex buildComplex(const GradedPtr& a, std::size_t maxDegree, SignConvention convention)
{
    HochschildComplex c = buildComplex(identityBimodule(a), maxDegree, convention);
    c.identityCoefficients_ = true;
    return c;
}

HochschildDims hhDims(const HochschildComplex& c)
{
    HochschildDims h;
    h.dims = cohomologyDims(c.segment());
    h.dims.resize(c.truncation() + 1);
    return h;
}

std::string formatDims(const HochschildDims& h)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < h.dims.size(); ++i)
        out << (i ? " " : "") << h.dims[i];
    if (h.topFlagged)
        out << "*";
    return out.str();
}

/* ------------------------------------------------------------------ */

std::optional<std::size_t> chainMapFailure(const ComplexSegment& source, const ComplexSegment& target,
                                           const ChainMap& f)
{
    for (std::size_t n = 0; n + 1 < f.maps.size(); ++n)
    {
        if (n >= source.d.size() || n + f.shift >= target.d.size())
            break;
        QMatrix lhs = f.maps[n + 1] * source.d[n];
        QMatrix rhs = target.d[n + f.shift] * f.maps[n];
        if (f.shift % 2 == 1)
            rhs = rhs.scaled(Rational(-1));
        if (lhs != rhs)
            return n;
    }
    return std::nullopt;
}

ComplexSegment directSum(const ComplexSegment& a, const ComplexSegment& b)
{
    ComplexSegment out;
    for (std::size_t n = 0; n < std::min(a.dims.size(), b.dims.size()); ++n)
        out.dims.push_back(a.dims[n] + b.dims[n]);
    for (std::size_t n = 0; n < std::min(a.d.size(), b.d.size()); ++n)
        out.d.push_back(QMatrix::blockDiagonal({a.d[n], b.d[n]}));
    return out;
}

/* ------------------------------------------------------------------ */

Restriction restrictComplex(const GradedFunctor& f, const HochschildComplex& c)
{
    requireSameSource(f, c);
    Restriction out;
    out.target = buildComplex(restrictBimodule(f, c.coefficients()), c.truncation(), c.convention());
    for (std::size_t n = 0; n < c.segment().dims.size(); ++n)
    {
        QMatrix m(out.target.dim(n), c.dim(n));
        const auto& blocks = out.target.blocks(n);
        for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        {
            const CochainBlock& beta = blocks[bi];
            std::size_t imageBlock = c.blockOf(mapSimplex(f.sharpFunctor(), beta.simplex));
            forEachMulti(beta.factorDims, [&](const std::vector<std::size_t>& multi) {
                // expand F b_{j_0} ⊗ ... ⊗ F b_{j_{n-1}} in the basis of the image factors
                std::vector<SparseVector> factors;
                for (std::size_t k = 0; k < n; ++k)
                    factors.push_back(toSparse(f.homMap(beta.simplex.mors[k]).column(multi[k])));
                std::vector<std::size_t> sizes;
                for (const SparseVector& s : factors)
                    sizes.push_back(s.size());
                forEachMulti(sizes, [&](const std::vector<std::size_t>& pick) {
                    Rational coeff(1);
                    std::vector<std::size_t> image(n);
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        image[k] = factors[k][pick[k]].first;
                        coeff *= factors[k][pick[k]].second;
                    }
                    for (std::size_t t = 0; t < beta.targetDim; ++t)
                        m.add(out.target.coordinate(n, bi, multi, t), c.coordinate(n, imageBlock, image, t), coeff);
                });
            });
        }
        out.map.maps.push_back(std::move(m));
    }
    return out;
}

Restriction restrictIntrinsic(const GradedFunctor& f, const HochschildComplex& c)
{
    if (!c.identityCoefficients())
        throw Error("CoefficientMismatch", "the intrinsic restriction needs the complex with identity coefficients");
    if (!f.isSubcartesian())
        throw Error("NotSubcartesian", "some hom map of the functor is not invertible");
    Restriction coefficient = restrictComplex(f, c);
    Restriction out;
    out.target = buildComplex(f.source(), c.truncation(), c.convention());
    const FinCat& sharp = *f.source()->sharp();
    for (std::size_t n = 0; n < c.segment().dims.size(); ++n)
    {
        QMatrix k(out.target.dim(n), coefficient.target.dim(n));
        const auto& blocks = out.target.blocks(n);
        for (std::size_t bi = 0; bi < blocks.size(); ++bi)
        {
            const CochainBlock& beta = blocks[bi];
            const CochainBlock& from = coefficient.target.blocks(n)[bi];
            QMatrix inv = inverse(f.homMap(simplexComposite(sharp, beta.simplex)));
            for (std::size_t x = 0; x < beta.inputs; ++x)
                for (std::size_t r = 0; r < inv.rows(); ++r)
                    for (const QMatrix::Entry& e : inv.row(r))
                        k.set(beta.offset + x * beta.targetDim + r, from.offset + x * from.targetDim + e.col, e.value);
        }
        out.map.maps.push_back(k * coefficient.map.maps[n]);
    }
    return out;
}

/* ------------------------------------------------------------------ */

Cohomology::Cohomology(const ComplexSegment& seg, std::size_t n)
    : ambient_(seg.dims.at(n))
{
    if (n >= seg.d.size())
        throw Error("DimensionMismatch", "cohomology needs the next differential");
    differential_ = seg.d[n];
    Echelon ech(ambient_);
    std::vector<QVector> boundaries;
    if (n > 0)
    {
        for (const QVector& v : imageBasis(seg.d[n - 1]))
        {
            ech.insert(toSparse(v));
            boundaries.push_back(v);
        }
    }
    for (const QVector& z : kernelBasis(differential_))
        if (ech.insert(toSparse(z)))
            representatives_.push_back(z);
    boundaries_ = boundaries.size();
    std::vector<QVector> all = representatives_;
    all.insert(all.end(), boundaries.begin(), boundaries.end());
    span_ = SpanCoordinates(ambient_, all);
}

QVector Cohomology::classOf(const QVector& cocycle) const
{
    for (const Rational& x : differential_.apply(cocycle))
        if (x != 0)
            throw Error("NotACocycle", "the vector is not closed");
    auto coords = span_.coordinates(cocycle);
    if (!coords)
        throw Error("NotACocycle", "the vector is outside the cocycle space");
    coords->resize(representatives_.size());
    return *coords;
}

QMatrix inducedMap(const ComplexSegment& source, const ComplexSegment& target, const QMatrix& fn, std::size_t n,
                   std::size_t targetDegree)
{
    Cohomology hs(source, n);
    Cohomology ht(target, targetDegree);
    std::vector<QVector> cols;
    for (const QVector& rep : hs.representatives())
        cols.push_back(ht.classOf(fn.apply(rep)));
    return QMatrix::fromColumns(ht.dim(), cols);
}

bool ExactnessReport::exact() const
{
    if (!failures.empty())
        return false;
    for (const DegreeVerdict& d : degrees)
        if (!d.verdict.exact)
            return false;
    return !les || les->verdict.exact;
}

ExactnessReport checkShortExact(const ShortExactSequence& s, const std::string& label, bool withLongSequence,
                                std::size_t lastDegree)
{
    ExactnessReport report;
    report.label = label;
    report.truncation = lastDegree;
    for (std::size_t n = 0; n <= lastDegree; ++n)
    {
        DegreeVerdict v;
        v.degree = n;
        if (s.f[n].cols() != s.sub.dims[n] || s.f[n].rows() != s.middle.dims[n] || s.g[n].cols() != s.middle.dims[n] ||
            s.g[n].rows() != s.quotient.dims[n])
        {
            v.verdict.exact = false;
            v.verdict.reason = "shapes do not line up";
        }
        else
            v.verdict = isExactSequence({s.f[n], s.g[n]}, true, true);
        report.degrees.push_back(v);
    }
    if (auto bad = chainMapFailure(s.sub, s.middle, ChainMap{s.f, 0}))
        report.failures.push_back(degreeLabel("the first map is not a chain map", *bad));
    if (auto bad = chainMapFailure(s.middle, s.quotient, ChainMap{s.g, 0}))
        report.failures.push_back(degreeLabel("the second map is not a chain map", *bad));
    if (!withLongSequence || !report.failures.empty())
        return report;
    for (const DegreeVerdict& d : report.degrees)
        if (!d.verdict.exact)
            return report;

    LongExactSequence les;
    std::vector<Cohomology> ha, hb, hc;
    for (std::size_t n = 0; n <= lastDegree; ++n)
    {
        ha.emplace_back(s.sub, n);
        hb.emplace_back(s.middle, n);
        hc.emplace_back(s.quotient, n);
    }
    for (std::size_t n = 0; n <= lastDegree; ++n)
    {
        const std::string deg = "^" + std::to_string(n);
        les.terms.insert(les.terms.end(), {"H" + deg + "(" + s.names[0] + ")", "H" + deg + "(" + s.names[1] + ")",
                                           "H" + deg + "(" + s.names[2] + ")"});
        les.dims.insert(les.dims.end(), {ha[n].dim(), hb[n].dim(), hc[n].dim()});
        std::vector<QVector> fcols, gcols;
        for (const QVector& rep : ha[n].representatives())
            fcols.push_back(hb[n].classOf(s.f[n].apply(rep)));
        for (const QVector& rep : hb[n].representatives())
            gcols.push_back(hc[n].classOf(s.g[n].apply(rep)));
        les.maps.push_back(QMatrix::fromColumns(hb[n].dim(), fcols));
        les.maps.push_back(QMatrix::fromColumns(hc[n].dim(), gcols));
        if (n == lastDegree)
            break;
        // snake: lift along g, apply d, pull back along f
        std::vector<QVector> dcols;
        for (const QVector& rep : hc[n].representatives())
        {
            auto lift = solve(s.g[n], rep);
            if (!lift)
                throw Error("NotExact", degreeLabel("a cocycle of the quotient has no lift", n));
            QVector boundary = s.middle.d[n].apply(*lift);
            auto back = solve(s.f[n + 1], boundary);
            if (!back)
                throw Error("NotExact", degreeLabel("the snake boundary is not in the subcomplex", n + 1));
            dcols.push_back(ha[n + 1].classOf(*back));
        }
        les.connecting.push_back(QMatrix::fromColumns(ha[n + 1].dim(), dcols));
        les.maps.push_back(les.connecting.back());
    }
    les.verdict = isExactSequence(les.maps, true, false);
    report.les = les;
    return report;
}

/* ------------------------------------------------------------------ */

SupportComplex supportComplex(const GradedFunctor& f, const HochschildComplex& c)
{
    requireSameSource(f, c);
    if (!nerveInjective(f.sharpFunctor(), 1))
        throw Error("Not1Injective", "the functor identifies two homs");
    if (!f.isSubcartesian())
        throw Error("NotSubcartesian", "some hom map of the functor is not invertible");
    const FinCat& sharpB = *f.source()->sharp();
    SupportComplex out;
    for (std::size_t n = 0; n < c.segment().dims.size(); ++n)
    {
        std::set<std::pair<ObjId, std::vector<MorId> > > image;
        for (const Simplex& s : nerve(sharpB, n))
        {
            Simplex t = mapSimplex(f.sharpFunctor(), s);
            image.insert({t.start, t.mors});
        }
        std::vector<std::size_t> coords;
        for (const CochainBlock& b : c.blocks(n))
            if (!image.count({b.simplex.start, b.simplex.mors}))
                for (std::size_t k = 0; k < b.width(); ++k)
                    coords.push_back(b.offset + k);
        out.segment.dims.push_back(coords.size());
        out.inclusion.push_back(selection(c.dim(n), coords));
        out.coordinates.push_back(std::move(coords));
    }
    for (std::size_t n = 0; n < c.segment().d.size(); ++n)
    {
        QMatrix restricted = c.differential(n) * out.inclusion[n];
        QMatrix d = out.inclusion[n + 1].transpose() * restricted;
        if (out.inclusion[n + 1] * d != restricted)
            throw Error("NotAComplex", degreeLabel("the support is not a subcomplex", n));
        out.segment.d.push_back(std::move(d));
    }
    return out;
}

ExactnessReport sheafCheck(const HochschildComplex& c, const std::vector<GradedFunctor>& family)
{
    for (const GradedFunctor& f : family)
    {
        requireSameSource(f, c);
        if (!f.isSubcartesian())
            throw Error("NotSubcartesian", "a member of the family is not subcartesian");
    }
    CoverVerdict cover = isNCover(sharpFamily(family), c.truncation(), 0);
    if (!cover.isCover)
        throw Error("CoverCheckFailed", "the family is not a " + std::to_string(c.truncation()) + "-cover");

    std::vector<Restriction> pieces;
    for (const GradedFunctor& f : family)
        pieces.push_back(restrictComplex(f, c));
    struct Overlap
    {
        std::size_t i, j;
        Restriction first, second;
    };
    std::vector<Overlap> overlaps;
    for (std::size_t i = 0; i < family.size(); ++i)
        for (std::size_t j = i; j < family.size(); ++j)
        {
            GradedPullback p = pullbackGraded(family[i], family[j]);
            overlaps.push_back({i, j, restrictComplex(p.first, pieces[i].target),
                                restrictComplex(p.second, pieces[j].target)});
        }

    ExactnessReport report;
    report.label = "sheaf";
    report.convention = c.convention();
    report.truncation = c.truncation();
    for (std::size_t n = 0; n <= c.truncation(); ++n)
    {
        std::vector<std::size_t> pieceOffset;
        std::size_t pieceDim = 0;
        for (const Restriction& r : pieces)
        {
            pieceOffset.push_back(pieceDim);
            pieceDim += r.target.dim(n);
        }
        std::size_t overlapDim = 0;
        for (const Overlap& o : overlaps)
            overlapDim += o.first.target.dim(n);
        QMatrix into(pieceDim, c.dim(n));
        QMatrix diff(overlapDim, pieceDim);
        for (std::size_t i = 0; i < pieces.size(); ++i)
        {
            const QMatrix& r = pieces[i].map.maps[n];
            for (std::size_t row = 0; row < r.rows(); ++row)
                for (const QMatrix::Entry& e : r.row(row))
                    into.set(pieceOffset[i] + row, e.col, e.value);
        }
        std::size_t rowOffset = 0;
        for (const Overlap& o : overlaps)
        {
            const QMatrix& p = o.first.map.maps[n];
            const QMatrix& q = o.second.map.maps[n];
            for (std::size_t row = 0; row < p.rows(); ++row)
            {
                for (const QMatrix::Entry& e : p.row(row))
                    diff.add(rowOffset + row, pieceOffset[o.i] + e.col, e.value);
                for (const QMatrix::Entry& e : q.row(row))
                    diff.add(rowOffset + row, pieceOffset[o.j] + e.col, -e.value);
            }
            rowOffset += p.rows();
        }
        report.degrees.push_back({n, isExactSequence({into, diff}, true, false)});
    }
    return report;
}

ExactnessReport mayerVietoris(const HochschildComplex& c, const GradedFunctor& f1, const GradedFunctor& f2,
                              std::size_t coverDepth)
{
    for (const GradedFunctor* f : {&f1, &f2})
    {
        requireSameSource(*f, c);
        if (!nerveInjective(f->sharpFunctor(), 1))
            throw Error("Not1Injective", "a member of the cover identifies two homs");
        if (!f->isSubcartesian())
            throw Error("NotSubcartesian", "a member of the cover is not subcartesian");
    }
    CoverVerdict cover = isNCover(sharpFamily({f1, f2}), std::nullopt, coverDepth);
    if (!cover.isCover)
        throw Error("NotACover", "the two functors do not form an ∞-cover");

    Restriction r1 = restrictComplex(f1, c);
    Restriction r2 = restrictComplex(f2, c);
    GradedPullback p = pullbackGraded(f1, f2);
    Restriction q1 = restrictComplex(p.first, r1.target);
    Restriction q2 = restrictComplex(p.second, r2.target);

    ShortExactSequence s;
    s.sub = c.segment();
    s.middle = directSum(r1.target.segment(), r2.target.segment());
    s.quotient = q1.target.segment();
    s.names = {"U", "V1+V2", "V12"};
    for (std::size_t n = 0; n < c.segment().dims.size(); ++n)
    {
        s.f.push_back(QMatrix::vstack(r1.map.maps[n], r2.map.maps[n]));
        s.g.push_back(QMatrix::hstack(q1.map.maps[n], q2.map.maps[n].scaled(Rational(-1))));
    }
    ExactnessReport report = checkShortExact(s, "mayer-vietoris", true, c.truncation());
    report.convention = c.convention();
    return report;
}

ExactnessReport localizationCheck(const HochschildComplex& c, const std::vector<char>& ideal,
                                  const Subcategory& complement)
{
    const Bimodule& m = c.coefficients();
    SupportSplit split = supportSplit(m, ideal, complement);
    const std::size_t top = c.truncation();

    // coefficient-based sequence
    HochschildComplex cz = buildComplex(split.supported, top, c.convention());
    HochschildComplex cv = buildComplex(split.quotient, top, c.convention());
    ShortExactSequence coeff;
    coeff.sub = cz.segment();
    coeff.middle = c.segment();
    coeff.quotient = cv.segment();
    coeff.f = coefficientMap(cz, c, split.inclusion);
    coeff.g = coefficientMap(c, cv, split.projection);

    // kernel-based sequence
    GradedMap restricted = restrictGraded(c.source(), embedSubcategory(complement).inclusion);
    SupportComplex support = supportComplex(restricted.functor, c);
    Restriction onV = restrictComplex(restricted.functor, c);
    ShortExactSequence kernel;
    kernel.sub = support.segment;
    kernel.middle = c.segment();
    kernel.quotient = onV.target.segment();
    kernel.f = support.inclusion;
    kernel.g = onV.map.maps;

    ExactnessReport a = checkShortExact(coeff, "coefficient", false, top);
    ExactnessReport b = checkShortExact(kernel, "kernel", false, top);
    ExactnessReport report;
    report.label = "localization";
    report.convention = c.convention();
    report.truncation = top;
    for (std::size_t n = 0; n <= top; ++n)
    {
        DegreeVerdict v;
        v.degree = n;
        if (!a.degrees[n].verdict.exact)
            v.verdict = a.degrees[n].verdict;
        else if (!b.degrees[n].verdict.exact)
            v.verdict = b.degrees[n].verdict;
        report.degrees.push_back(v);
    }
    for (const std::string& s : a.failures)
        report.failures.push_back("coefficient sequence: " + s);
    for (const std::string& s : b.failures)
        report.failures.push_back("kernel sequence: " + s);

    // θ_𝒵: C(𝔞, M_𝒵) → C_{𝒰∖𝒱♯}(𝔞, M) and θ_𝒱: C(𝔞, M_𝒱) → C(𝔞|_𝒱, M|_𝒱)
    ChainMap thetaZ, thetaV;
    for (std::size_t n = 0; n < c.segment().dims.size(); ++n)
    {
        QMatrix z = support.inclusion[n].transpose() * coeff.f[n];
        if (support.inclusion[n] * z != coeff.f[n])
            report.failures.push_back(degreeLabel("the supported cochains leave the support complex", n));
        QMatrix v = onV.map.maps[n] * coeff.g[n].transpose();
        if (v * coeff.g[n] != onV.map.maps[n])
            report.failures.push_back(degreeLabel("the restriction does not factor through the quotient", n));
        thetaZ.maps.push_back(z);
        thetaV.maps.push_back(v);
    }
    if (auto n = firstNonBijective(thetaZ.maps))
        report.failures.push_back(degreeLabel("the kernel comparison is not bijective", *n));
    if (auto n = firstNonBijective(thetaV.maps))
        report.failures.push_back(degreeLabel("the quotient comparison is not bijective", *n));
    if (auto n = chainMapFailure(cz.segment(), support.segment, thetaZ))
        report.failures.push_back(degreeLabel("the kernel comparison is not a chain map", *n));
    if (auto n = chainMapFailure(cv.segment(), onV.target.segment(), thetaV))
        report.failures.push_back(degreeLabel("the quotient comparison is not a chain map", *n));
    return report;
}

/* ------------------------------------------------------------------ */

namespace {

/**
 * The connecting cochain for one side of the arrow category: for β the
 * cross factor is the last argument and x·ψ(...) is taken; for α it is
 * the first and φ(...)·x is taken with the sign of the right face.
 */
ChainMap crossMap(const ArrowGraded& arrow, const HochschildComplex& cs, const HochschildComplex& side,
                  const GradedFunctor& embed, bool crossLast)
{
    const GradedCat& cat = *arrow.category;
    const FinCat& sharpC = *cat.sharp();
    const FinCat& sharpSide = *side.source()->sharp();
    std::map<HomId, HomId> preimage;
    for (HomId h = 0; h < side.source()->homCount(); ++h)
        preimage[embed.onHom(h)] = h;
    std::vector<QMatrix> inverses;
    for (HomId h = 0; h < side.source()->homCount(); ++h)
        inverses.push_back(inverse(embed.homMap(h)));

    ChainMap out;
    out.shift = 1;
    for (std::size_t n = 0; n + 1 < cs.segment().dims.size(); ++n)
    {
        QMatrix m(cs.dim(n + 1), side.dim(n));
        const Rational sign = crossLast ? faceSign(cs.convention(), 0) : faceSign(cs.convention(), n + 1);
        const auto& blocks = cs.blocks(n + 1);
        for (std::size_t tb = 0; tb < blocks.size(); ++tb)
        {
            const CochainBlock& tau = blocks[tb];
            if (tau.targetDim == 0)
                continue;
            const auto& h = tau.simplex.mors;
            std::size_t crossPos = crossLast ? n : 0;
            if (!arrow.crossIdeal[cat.homMorphism(h[crossPos])])
                continue;
            std::vector<HomId> rest;
            bool inside = true;
            for (std::size_t k = 0; k <= n; ++k)
            {
                if (k == crossPos)
                    continue;
                auto it = preimage.find(h[k]);
                if (it == preimage.end())
                {
                    inside = false;
                    break;
                }
                rest.push_back(it->second);
            }
            if (!inside)
                continue;
            ObjId start = crossLast ? sharpC.source(h[0]) : sharpC.target(h[0]);
            ObjId sideStart = kNone;
            for (ObjId y = 0; y < side.source()->objectCount(); ++y)
                if (embed.onObject(y) == start)
                    sideStart = y;
            if (sideStart == kNone)
                continue;
            Simplex sigma = makeSimplex(sideStart, rest);
            std::size_t sb = side.blockOf(sigma);
            const CochainBlock& phi = side.blocks(n)[sb];
            HomId g = simplexComposite(sharpSide, sigma);
            HomId fg = embed.onHom(g);
            QMatrix valueMap = embed.homMap(g);

            forEachMulti(tau.factorDims, [&](const std::vector<std::size_t>& multi) {
                std::size_t x = multi[crossPos];
                std::vector<SparseVector> args;
                for (std::size_t k = 0, r = 0; k <= n; ++k)
                {
                    if (k == crossPos)
                        continue;
                    args.push_back(toSparse(inverses[rest[r]].column(multi[k])));
                    ++r;
                }
                std::vector<std::size_t> sizes;
                for (const SparseVector& s : args)
                    sizes.push_back(s.size());
                forEachMulti(sizes, [&](const std::vector<std::size_t>& pick) {
                    Rational coeff = sign;
                    std::vector<std::size_t> sub(n);
                    for (std::size_t k = 0; k < n; ++k)
                    {
                        sub[k] = args[k][pick[k]].first;
                        coeff *= args[k][pick[k]].second;
                    }
                    for (std::size_t t = 0; t < phi.targetDim; ++t)
                    {
                        SparseVector value = toSparse(valueMap.column(t));
                        SparseVector result = crossLast
                                                  ? cat.compose(h[crossPos], fg, {{x, Rational(1)}}, value)
                                                  : cat.compose(fg, h[crossPos], value, {{x, Rational(1)}});
                        for (const auto& [r, v] : result)
                            m.add(cs.coordinate(n + 1, tb, multi, r), side.coordinate(n, sb, sub, t), coeff * v);
                    }
                });
            });
        }
        out.maps.push_back(std::move(m));
    }
    return out;
}

std::vector<std::size_t> dimsOf(const HochschildComplex& c)
{
    return hhDims(c).dims;
}

}   // namespace

TriangleReport connectingMaps(const Bimodule& m, std::size_t maxDegree, SignConvention convention)
{
    TriangleReport out;
    out.arrow = arrowCategory(m);
    const GradedPtr& cat = out.arrow.category;
    HochschildComplex cc = buildComplex(cat, maxDegree, convention);
    Bimodule supported = supportedOn(identityBimodule(cat), out.arrow.crossIdeal);
    HochschildComplex cs = buildComplex(supported, maxDegree, convention);
    Restriction rb = restrictIntrinsic(out.arrow.fromRight, cc);
    Restriction ra = restrictIntrinsic(out.arrow.fromLeft, cc);

    std::vector<QMatrix> perSpace;
    for (SpaceId p = 0; p < supported.spaceCount(); ++p)
        perSpace.push_back(supported.dim(p) > 0 ? QMatrix::identity(supported.dim(p))
                                                : QMatrix(cc.coefficients().dim(p), 0));
    ShortExactSequence s;
    s.sub = cs.segment();
    s.middle = cc.segment();
    s.quotient = directSum(rb.target.segment(), ra.target.segment());
    s.names = {"S", "c", "b+a"};
    s.f = coefficientMap(cs, cc, perSpace);
    for (std::size_t n = 0; n < cc.segment().dims.size(); ++n)
        s.g.push_back(QMatrix::vstack(rb.map.maps[n], ra.map.maps[n]));
    out.report = checkShortExact(s, "triangle", true, maxDegree);
    out.report.convention = convention;

    out.beta = crossMap(out.arrow, cs, rb.target, out.arrow.fromRight, true);
    out.alpha = crossMap(out.arrow, cs, ra.target, out.arrow.fromLeft, false);
    if (auto n = chainMapFailure(rb.target.segment(), cs.segment(), out.beta))
        out.report.failures.push_back(degreeLabel("beta is not a chain map", *n));
    if (auto n = chainMapFailure(ra.target.segment(), cs.segment(), out.alpha))
        out.report.failures.push_back(degreeLabel("alpha is not a chain map", *n));

    if (out.report.les)
    {
        for (std::size_t n = 0; n < maxDegree; ++n)
        {
            QMatrix joint = QMatrix::hstack(out.beta.maps[n], out.alpha.maps[n]);
            QMatrix induced = inducedMap(s.quotient, cs.segment(), joint, n, n + 1);
            if (induced != out.report.les->connecting[n])
                out.report.failures.push_back(degreeLabel("(beta, alpha) does not induce the connecting map", n));
        }
    }

    out.hhArrow = dimsOf(cc);
    out.hhRight = dimsOf(rb.target);
    out.hhLeft = dimsOf(ra.target);
    std::vector<std::size_t> hs = dimsOf(cs);
    for (std::size_t i = 0; i < maxDegree; ++i)
        out.ext.push_back(hs[i + 1]);
    return out;
}

CensoringVerdict censoringCheck(const HochschildComplex& c, const Subcategory& v)
{
    CensoringVerdict out;
    const GradedCat& a = *c.source();
    for (HomId h = 0; h < a.homCount(); ++h)
    {
        if (a.dim(h) > 0 && !v.morphisms[a.homMorphism(h)])
        {
            out.witness = a.base()->morphismName(a.homMorphism(h)) + ": " + a.objectName(a.homSource(h)) + " -> " +
                          a.objectName(a.homTarget(h));
            return out;
        }
    }
    out.censoring = true;
    GradedMap restricted = restrictGraded(c.source(), embedSubcategory(v).inclusion);
    Restriction r = restrictComplex(restricted.functor, c);
    out.bijective = !firstNonBijective(r.map.maps);
    return out;
}

}   // namespace mgc
