/**
 * Bimodules, tensor products, Hom bimodules, support splitting and arrow
 * categories.
 */

#include "mgc/bimodule.hpp"

#include <algorithm>
#include <set>

namespace mgc {

namespace {

using Accum = std::map<std::size_t, Rational>;

void addTo(Accum& acc, const SparseVector& v, const Rational& c)
{
    if (c == 0)
        return;
    for (const auto& [k, x] : v)
        acc[k] += c * x;
}

SparseVector fromAccum(const Accum& acc)
{
    SparseVector out;
    for (const auto& [k, x] : acc)
        if (x != 0)
            out.emplace_back(k, x);
    return out;
}

SparseVector unitVector(std::size_t i)
{
    return {{i, Rational(1)}};
}

SparseVector column(const QMatrix& m, std::size_t j)
{
    return toSparse(m.column(j));
}

bool sameGraded(const GradedPtr& a, const GradedPtr& b)
{
    return a == b || !structuralDifference(*a, *b);
}

std::vector<std::vector<HomId> > homsFrom(const GradedCat& a)
{
    std::vector<std::vector<HomId> > out(a.objectCount());
    for (HomId h = 0; h < a.homCount(); ++h)
        out[a.homSource(h)].push_back(h);
    return out;
}

std::vector<std::vector<HomId> > homsInto(const GradedCat& a)
{
    std::vector<std::vector<HomId> > out(a.objectCount());
    for (HomId h = 0; h < a.homCount(); ++h)
        out[a.homTarget(h)].push_back(h);
    return out;
}

HomId unitHom(const GradedCat& a, ObjId x)
{
    return a.homId(a.base()->identity(a.over(x)), x, x);
}

std::string spaceLabel(const Bimodule& m, SpaceId p)
{
    const Bimodule::Space& sp = m.space(p);
    return m.carrier().element(sp.element).name + "(" + m.right()->objectName(sp.right) + ", " +
           m.left()->objectName(sp.left) + ")";
}

std::string uniqueName(std::set<std::string>& used, const std::string& name)
{
    std::string candidate = name;
    for (std::size_t k = 2; !used.insert(candidate).second; ++k)
        candidate = name + "#" + std::to_string(k);
    return candidate;
}

/**
 * Linear system whose unknowns are a list of matrix blocks F_k, stored
 * row-major one after the other.
 */
class FamilySystem
{
    public:
        struct Term
        {
            std::size_t block;
            std::optional<QMatrix> post;   // applied after F, identity if absent
            SparseVector x;                // applied before F
            Rational sign;
        };

        std::size_t addBlock(SpaceId source, SpaceId target, std::size_t rows, std::size_t cols)
        {
            blockOf_[source] = blocks_.size();
            blocks_.push_back({source, target, rows, cols, variables_});
            variables_ += rows * cols;
            return blocks_.size() - 1;
        }

        std::size_t blockOf(SpaceId source) const { return blockOf_.at(source); }
        const std::vector<HomBimodule::Block>& blocks() const { return blocks_; }
        std::size_t variables() const { return variables_; }

        /**
         * Adds the equations Σ sign·post·F_block·x = 0 in an outDim space.
         */
        void addEquation(const std::vector<Term>& terms, std::size_t outDim)
        {
            for (std::size_t r = 0; r < outDim; ++r)
            {
                Accum row;
                for (const Term& t : terms)
                {
                    const HomBimodule::Block& b = blocks_[t.block];
                    for (std::size_t r2 = 0; r2 < b.rows; ++r2)
                    {
                        Rational p = t.post ? t.post->get(r, r2) : Rational(r == r2 ? 1 : 0);
                        if (p == 0)
                            continue;
                        for (const auto& [c, x] : t.x)
                            row[b.offset + r2 * b.cols + c] += t.sign * p * x;
                    }
                }
                SparseVector v = fromAccum(row);
                if (!v.empty())
                    rows_.push_back(std::move(v));
            }
        }

        std::vector<QVector> solve() const
        {
            QMatrix m(rows_.size(), variables_);
            for (std::size_t r = 0; r < rows_.size(); ++r)
                for (const auto& [c, x] : rows_[r])
                    m.set(r, c, x);
            return kernelBasis(m);
        }

    private:
        std::vector<HomBimodule::Block> blocks_;
        std::map<SpaceId, std::size_t> blockOf_;
        std::size_t variables_ = 0;
        std::vector<SparseVector> rows_;
};

QMatrix blockMatrix(const HomBimodule::Block& b, const QVector& v)
{
    QMatrix out(b.rows, b.cols);
    for (std::size_t r = 0; r < b.rows; ++r)
        for (std::size_t c = 0; c < b.cols; ++c)
            if (v[b.offset + r * b.cols + c] != 0)
                out.set(r, c, v[b.offset + r * b.cols + c]);
    return out;
}

/**
 * Coordinates of families in the solved Hom spaces.
 */
class HomCoordinates
{
    public:
        explicit HomCoordinates(const HomBimodule& h) : h_(h), coords_(h.basis.size()) {}

        QVector of(SpaceId p, const std::map<SpaceId, QMatrix>& family)
        {
            if (!coords_[p])
                coords_[p].emplace(h_.variables[p], h_.basis[p]);
            QVector v(h_.variables[p]);
            for (const HomBimodule::Block& b : h_.blocks[p])
            {
                auto it = family.find(b.source);
                if (it == family.end())
                    continue;
                for (std::size_t r = 0; r < b.rows; ++r)
                    for (const auto& e : it->second.row(r))
                        v[b.offset + r * b.cols + e.col] = e.value;
            }
            auto c = coords_[p]->coordinates(v);
            if (!c)
                throw Error("InternalError", "an action leaves the Hom space");
            return *c;
        }

    private:
        const HomBimodule& h_;
        std::vector<std::optional<SpanCoordinates> > coords_;
};

}   // namespace

/* ------------------------------------------------------------------ */

SpaceId Bimodule::spaceId(std::size_t element, ObjId right, ObjId left) const
{
    auto it = spaceIndex_.find({element, right, left});
    if (it == spaceIndex_.end())
        throw Error("BadEndpoints", "no space for element " + carrier_.element(element).name);
    return it->second;
}

std::size_t Bimodule::totalDim() const
{
    std::size_t total = 0;
    for (SpaceId p = 0; p < spaceCount(); ++p)
        total += dim(p);
    return total;
}

SpaceId Bimodule::leftTarget(HomId h, SpaceId p) const
{
    auto it = leftActions_.find({h, p});
    return it == leftActions_.end() ? kNone : it->second.target;
}

SpaceId Bimodule::rightTarget(SpaceId p, HomId h) const
{
    auto it = rightActions_.find({p, h});
    return it == rightActions_.end() ? kNone : it->second.target;
}

const std::vector<SparseVector>& Bimodule::leftConstants(HomId h, SpaceId p) const
{
    auto it = leftActions_.find({h, p});
    if (it == leftActions_.end())
        throw Error("NotComposable", "left action on " + spaceLabel(*this, p));
    return it->second.constants;
}

const std::vector<SparseVector>& Bimodule::rightConstants(SpaceId p, HomId h) const
{
    auto it = rightActions_.find({p, h});
    if (it == rightActions_.end())
        throw Error("NotComposable", "right action on " + spaceLabel(*this, p));
    return it->second.constants;
}

SparseVector Bimodule::actLeft(HomId h, SpaceId p, const SparseVector& a, const SparseVector& m) const
{
    const auto& c = leftConstants(h, p);
    Accum acc;
    for (const auto& [i, x] : a)
        for (const auto& [j, y] : m)
            addTo(acc, c[i * dim(p) + j], x * y);
    return fromAccum(acc);
}

SparseVector Bimodule::actRight(SpaceId p, HomId h, const SparseVector& m, const SparseVector& b) const
{
    const auto& c = rightConstants(p, h);
    std::size_t dh = right_->dim(h);
    Accum acc;
    for (const auto& [i, x] : m)
        for (const auto& [j, y] : b)
            addTo(acc, c[i * dh + j], x * y);
    return fromAccum(acc);
}

QMatrix Bimodule::leftMatrix(HomId h, const SparseVector& a, SpaceId p) const
{
    QMatrix out(dim(leftTarget(h, p)), dim(p));
    for (std::size_t j = 0; j < dim(p); ++j)
        for (const auto& [r, x] : actLeft(h, p, a, unitVector(j)))
            out.set(r, j, x);
    return out;
}

QMatrix Bimodule::rightMatrix(SpaceId p, HomId h, const SparseVector& b) const
{
    QMatrix out(dim(rightTarget(p, h)), dim(p));
    for (std::size_t j = 0; j < dim(p); ++j)
        for (const auto& [r, x] : actRight(p, h, unitVector(j), b))
            out.set(r, j, x);
    return out;
}

bool Bimodule::overIdentity() const
{
    return carrier_.left() == carrier_.right() && left_->base() == carrier_.left() && right_->base() == carrier_.left() &&
           carrier_.sameAs(SetBifunctor::identity(carrier_.left()));
}

/* ------------------------------------------------------------------ */

BimoduleBuilder::BimoduleBuilder(GradedPtr left, GradedPtr right, SetBifunctor carrier)
{
    if (left->base() != carrier.left() && !left->base()->sameAs(*carrier.left()))
        throw Error("ShapeMismatch", "the left category is not graded over the left side of the carrier");
    if (right->base() != carrier.right() && !right->base()->sameAs(*carrier.right()))
        throw Error("ShapeMismatch", "the right category is not graded over the right side of the carrier");
    module_.left_ = std::move(left);
    module_.right_ = std::move(right);
    module_.carrier_ = std::move(carrier);
    const GradedCat& a = *module_.left_;
    const GradedCat& b = *module_.right_;
    const SetBifunctor& s = module_.carrier_;
    for (std::size_t e = 0; e < s.size(); ++e)
        for (ObjId y : b.fiber(s.element(e).right))
            for (ObjId x : a.fiber(s.element(e).left))
            {
                module_.spaceIndex_[{e, y, x}] = module_.spaces_.size();
                module_.spaces_.push_back({e, y, x});
            }
    module_.basisNames_.resize(module_.spaces_.size());
    auto from = homsFrom(a);
    auto into = homsInto(b);
    for (SpaceId p = 0; p < module_.spaces_.size(); ++p)
    {
        const Bimodule::Space& sp = module_.spaces_[p];
        for (HomId h : from[sp.left])
        {
            std::size_t e = s.actLeft(a.homMorphism(h), sp.element);
            module_.leftActions_[{h, p}].target = module_.spaceIndex_.at({e, sp.right, a.homTarget(h)});
        }
        for (HomId h : into[sp.right])
        {
            std::size_t e = s.actRight(sp.element, b.homMorphism(h));
            module_.rightActions_[{p, h}].target = module_.spaceIndex_.at({e, b.homSource(h), sp.left});
        }
    }
}

SpaceId BimoduleBuilder::spaceId(std::size_t element, ObjId right, ObjId left) const
{
    return module_.spaceId(element, right, left);
}

void BimoduleBuilder::setBasis(SpaceId p, std::vector<std::string> names)
{
    module_.basisNames_.at(p) = std::move(names);
}

void BimoduleBuilder::setLeft(HomId h, std::size_t i, SpaceId p, std::size_t j, SparseVector value)
{
    auto it = module_.leftActions_.find({h, p});
    if (it == module_.leftActions_.end())
        throw Error("NotComposable", "left action on " + spaceLabel(module_, p));
    auto& c = it->second.constants;
    c.resize(module_.left_->dim(h) * module_.dim(p));
    c.at(i * module_.dim(p) + j) = std::move(value);
}

void BimoduleBuilder::setRight(SpaceId p, std::size_t i, HomId h, std::size_t j, SparseVector value)
{
    auto it = module_.rightActions_.find({p, h});
    if (it == module_.rightActions_.end())
        throw Error("NotComposable", "right action on " + spaceLabel(module_, p));
    auto& c = it->second.constants;
    std::size_t dh = module_.right_->dim(h);
    c.resize(module_.dim(p) * dh);
    c.at(i * dh + j) = std::move(value);
}

Bimodule BimoduleBuilder::build() const
{
    Bimodule m = module_;
    for (auto& [key, act] : m.leftActions_)
    {
        act.constants.resize(m.left_->dim(key.first) * m.dim(key.second));
        for (const SparseVector& v : act.constants)
            for (const auto& [k, x] : v)
                if (k >= m.dim(act.target))
                    throw Error("BadCoordinate", "left action leaves " + spaceLabel(m, act.target));
    }
    for (auto& [key, act] : m.rightActions_)
    {
        act.constants.resize(m.dim(key.first) * m.right_->dim(key.second));
        for (const SparseVector& v : act.constants)
            for (const auto& [k, x] : v)
                if (k >= m.dim(act.target))
                    throw Error("BadCoordinate", "right action leaves " + spaceLabel(m, act.target));
    }
    auto v = bimoduleViolations(m);
    if (!v.empty())
        throw Error(v.front().code, v.front().detail);
    return m;
}

std::vector<Violation> bimoduleViolations(const Bimodule& m)
{
    const GradedCat& a = *m.left();
    const GradedCat& b = *m.right();
    std::vector<Violation> out;
    auto from = homsFrom(a);
    auto into = homsInto(b);
    for (SpaceId p = 0; p < m.spaceCount() && out.empty(); ++p)
    {
        const Bimodule::Space& sp = m.space(p);
        HomId ua = unitHom(a, sp.left);
        HomId ub = unitHom(b, sp.right);
        for (std::size_t j = 0; j < m.dim(p); ++j)
        {
            if (m.actLeft(ua, p, a.unit(sp.left), unitVector(j)) != unitVector(j))
                out.push_back({"BadUnit", "BadUnit(left, " + m.basisName(p, j) + ")"});
            else if (m.actRight(p, ub, unitVector(j), b.unit(sp.right)) != unitVector(j))
                out.push_back({"BadUnit", "BadUnit(right, " + m.basisName(p, j) + ")"});
            if (!out.empty())
                break;
        }
    }
    if (!out.empty())
        return out;
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        const Bimodule::Space& sp = m.space(p);
        for (HomId h1 : from[sp.left])
        {
            SpaceId p1 = m.leftTarget(h1, p);
            for (HomId h2 : from[a.homTarget(h1)])
            {
                HomId hc = a.homId(a.base()->compose(a.homMorphism(h2), a.homMorphism(h1)), a.homSource(h1), a.homTarget(h2));
                for (std::size_t i2 = 0; i2 < a.dim(h2); ++i2)
                    for (std::size_t i1 = 0; i1 < a.dim(h1); ++i1)
                    {
                        SparseVector prod = a.compose(h2, h1, unitVector(i2), unitVector(i1));
                        for (std::size_t j = 0; j < m.dim(p); ++j)
                        {
                            if (m.actLeft(h2, p1, unitVector(i2), m.actLeft(h1, p, unitVector(i1), unitVector(j))) !=
                                m.actLeft(hc, p, prod, unitVector(j)))
                            {
                                out.push_back({"NonAssociative", "NonAssociative(" + a.basisName(h2, i2) + ", " +
                                                                 a.basisName(h1, i1) + ", " + m.basisName(p, j) + ")"});
                                return out;
                            }
                        }
                    }
            }
        }
        for (HomId h1 : into[sp.right])
        {
            SpaceId p1 = m.rightTarget(p, h1);
            for (HomId h2 : into[b.homSource(h1)])
            {
                HomId hc = b.homId(b.base()->compose(b.homMorphism(h1), b.homMorphism(h2)), b.homSource(h2), b.homTarget(h1));
                for (std::size_t i1 = 0; i1 < b.dim(h1); ++i1)
                    for (std::size_t i2 = 0; i2 < b.dim(h2); ++i2)
                    {
                        SparseVector prod = b.compose(h1, h2, unitVector(i1), unitVector(i2));
                        for (std::size_t j = 0; j < m.dim(p); ++j)
                        {
                            if (m.actRight(p1, h2, m.actRight(p, h1, unitVector(j), unitVector(i1)), unitVector(i2)) !=
                                m.actRight(p, hc, unitVector(j), prod))
                            {
                                out.push_back({"NonAssociative", "NonAssociative(" + m.basisName(p, j) + ", " +
                                                                 b.basisName(h1, i1) + ", " + b.basisName(h2, i2) + ")"});
                                return out;
                            }
                        }
                    }
            }
        }
        for (HomId ha : from[sp.left])
        {
            SpaceId pa = m.leftTarget(ha, p);
            for (HomId hb : into[sp.right])
            {
                SpaceId pb = m.rightTarget(p, hb);
                for (std::size_t i = 0; i < a.dim(ha); ++i)
                    for (std::size_t k = 0; k < b.dim(hb); ++k)
                        for (std::size_t j = 0; j < m.dim(p); ++j)
                        {
                            SparseVector x = m.actRight(pa, hb, m.actLeft(ha, p, unitVector(i), unitVector(j)), unitVector(k));
                            SparseVector y = m.actLeft(ha, pb, unitVector(i), m.actRight(p, hb, unitVector(j), unitVector(k)));
                            if (x != y)
                            {
                                out.push_back({"ActionsDoNotCommute", "ActionsDoNotCommute(" + a.basisName(ha, i) + ", " +
                                                                      m.basisName(p, j) + ", " + b.basisName(hb, k) + ")"});
                                return out;
                            }
                        }
            }
        }
    }
    return out;
}

std::optional<std::string> bimoduleDifference(const Bimodule& a, const Bimodule& b)
{
    if (structuralDifference(*a.left(), *b.left()) || structuralDifference(*a.right(), *b.right()))
        return std::string("graded categories differ");
    if (a.carrier().size() != b.carrier().size())
        return std::string("carriers differ in size");
    if (a.spaceCount() != b.spaceCount())
        return std::string("space counts differ");
    for (SpaceId p = 0; p < a.spaceCount(); ++p)
    {
        const auto& x = a.space(p);
        const auto& y = b.space(p);
        if (x.element != y.element || x.left != y.left || x.right != y.right)
            return "space " + std::to_string(p) + " differs";
        if (a.dim(p) != b.dim(p))
            return "dimension of " + spaceLabel(a, p) + " differs";
    }
    const GradedCat& l = *a.left();
    const GradedCat& r = *a.right();
    for (SpaceId p = 0; p < a.spaceCount(); ++p)
    {
        for (HomId h = 0; h < l.homCount(); ++h)
        {
            SpaceId t = a.leftTarget(h, p);
            if (t != b.leftTarget(h, p))
                return "left action targets differ on " + spaceLabel(a, p);
            if (t != kNone && a.leftConstants(h, p) != b.leftConstants(h, p))
                return "left action differs on " + spaceLabel(a, p);
        }
        for (HomId h = 0; h < r.homCount(); ++h)
        {
            SpaceId t = a.rightTarget(p, h);
            if (t != b.rightTarget(p, h))
                return "right action targets differ on " + spaceLabel(a, p);
            if (t != kNone && a.rightConstants(p, h) != b.rightConstants(p, h))
                return "right action differs on " + spaceLabel(a, p);
        }
    }
    return std::nullopt;
}

/* ------------------------------------------------------------------ */

Bimodule identityBimodule(const GradedPtr& a)
{
    BimoduleBuilder builder(a, a, SetBifunctor::identity(a->base()));
    std::vector<SpaceId> spaceOf(a->homCount());
    for (HomId h = 0; h < a->homCount(); ++h)
    {
        spaceOf[h] = builder.spaceId(a->homMorphism(h), a->homSource(h), a->homTarget(h));
        std::vector<std::string> names;
        for (std::size_t i = 0; i < a->dim(h); ++i)
            names.push_back(a->basisName(h, i));
        builder.setBasis(spaceOf[h], names);
    }
    auto from = homsFrom(*a);
    for (HomId f = 0; f < a->homCount(); ++f)
    {
        for (HomId g : from[a->homTarget(f)])
        {
            const auto& c = a->product(g, f);
            for (std::size_t i = 0; i < a->dim(g); ++i)
                for (std::size_t j = 0; j < a->dim(f); ++j)
                {
                    builder.setLeft(g, i, spaceOf[f], j, c[i * a->dim(f) + j]);
                    builder.setRight(spaceOf[g], i, f, j, c[i * a->dim(f) + j]);
                }
        }
    }
    return builder.build();
}

Bimodule lowerBimodule(const GradedFunctor& f)
{
    const GradedCat& b = *f.source();
    const GradedCat& a = *f.target();
    const Functor& phi = f.base();
    const FinCat& u = *phi.target();
    SetBifunctor carrier = SetBifunctor::lowerStar(phi);
    // Elements are enumerated as (x, m) with m leaving φ(x), as in lowerStar.
    std::vector<MorId> morphismOf;
    for (ObjId x = 0; x < phi.source()->objectCount(); ++x)
        for (MorId m : u.outgoing(phi.onObject(x)))
            morphismOf.push_back(m);
    BimoduleBuilder builder(f.target(), f.source(), carrier);
    auto homOf = [&](SpaceId p) {
        const Bimodule::Space& sp = builder.space(p);
        return a.homId(morphismOf[sp.element], f.onObject(sp.right), sp.left);
    };
    for (SpaceId p = 0; p < builder.spaceCount(); ++p)
    {
        HomId h = homOf(p);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < a.dim(h); ++i)
            names.push_back(b.objectName(builder.space(p).right) + "|" + a.basisName(h, i));
        builder.setBasis(p, names);
    }
    auto from = homsFrom(a);
    auto into = homsInto(b);
    for (SpaceId p = 0; p < builder.spaceCount(); ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        HomId hx = homOf(p);
        for (HomId g : from[sp.left])
        {
            const auto& c = a.product(g, hx);
            for (std::size_t i = 0; i < a.dim(g); ++i)
                for (std::size_t j = 0; j < a.dim(hx); ++j)
                    builder.setLeft(g, i, p, j, c[i * a.dim(hx) + j]);
        }
        for (HomId hb : into[sp.right])
        {
            HomId hf = f.onHom(hb);
            const QMatrix& fm = f.homMap(hb);
            for (std::size_t i = 0; i < a.dim(hx); ++i)
                for (std::size_t j = 0; j < b.dim(hb); ++j)
                    builder.setRight(p, i, hb, j, a.compose(hx, hf, unitVector(i), column(fm, j)));
        }
    }
    return builder.build();
}

Bimodule upperBimodule(const GradedFunctor& f)
{
    const GradedCat& a = *f.source();
    const GradedCat& b = *f.target();
    const Functor& phi = f.base();
    const FinCat& v = *phi.target();
    SetBifunctor carrier = SetBifunctor::upperStar(phi);
    // Elements are enumerated as (x, m) with m ending at φ(x), as in upperStar.
    std::vector<MorId> morphismOf;
    for (ObjId x = 0; x < phi.source()->objectCount(); ++x)
        for (MorId m = 0; m < v.morphismCount(); ++m)
            if (v.target(m) == phi.onObject(x))
                morphismOf.push_back(m);
    BimoduleBuilder builder(f.source(), f.target(), carrier);
    auto homOf = [&](SpaceId p) {
        const Bimodule::Space& sp = builder.space(p);
        return b.homId(morphismOf[sp.element], sp.right, f.onObject(sp.left));
    };
    for (SpaceId p = 0; p < builder.spaceCount(); ++p)
    {
        HomId h = homOf(p);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < b.dim(h); ++i)
            names.push_back(b.basisName(h, i) + "|" + a.objectName(builder.space(p).left));
        builder.setBasis(p, names);
    }
    auto from = homsFrom(a);
    auto into = homsInto(b);
    for (SpaceId p = 0; p < builder.spaceCount(); ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        HomId hy = homOf(p);
        for (HomId ha : from[sp.left])
        {
            HomId hf = f.onHom(ha);
            const QMatrix& fm = f.homMap(ha);
            for (std::size_t i = 0; i < a.dim(ha); ++i)
                for (std::size_t j = 0; j < b.dim(hy); ++j)
                    builder.setLeft(ha, i, p, j, b.compose(hf, hy, column(fm, i), unitVector(j)));
        }
        for (HomId hb : into[sp.right])
        {
            const auto& c = b.product(hy, hb);
            for (std::size_t i = 0; i < b.dim(hy); ++i)
                for (std::size_t j = 0; j < b.dim(hb); ++j)
                    builder.setRight(p, i, hb, j, c[i * b.dim(hb) + j]);
        }
    }
    return builder.build();
}

Bimodule restrictBimodule(const GradedFunctor& f, const Bimodule& m)
{
    if (!m.overIdentity())
        throw Error("ShapeMismatch", "restriction needs a bimodule over the identity bifunctor");
    if (!sameGraded(f.target(), m.left()))
        throw Error("ShapeMismatch", "the functor does not land in the bimodule's category");
    const GradedCat& b = *f.source();
    BimoduleBuilder builder(f.source(), f.source(), SetBifunctor::identity(b.base()));
    std::vector<SpaceId> original(builder.spaceCount());
    for (SpaceId p = 0; p < builder.spaceCount(); ++p)
    {
        const Bimodule::Space& sp = builder.space(p);
        original[p] = m.spaceId(f.base().onMorphism(sp.element), f.onObject(sp.right), f.onObject(sp.left));
        std::vector<std::string> names;
        for (std::size_t i = 0; i < m.dim(original[p]); ++i)
            names.push_back(m.basisName(original[p], i));
        builder.setBasis(p, names);
    }
    auto from = homsFrom(b);
    for (SpaceId p = 0; p < builder.spaceCount(); ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        SpaceId q = original[p];
        for (HomId h : from[sp.left])
        {
            for (std::size_t i = 0; i < b.dim(h); ++i)
                for (std::size_t j = 0; j < m.dim(q); ++j)
                    builder.setLeft(h, i, p, j, m.actLeft(f.onHom(h), q, column(f.homMap(h), i), unitVector(j)));
        }
        for (HomId h = 0; h < b.homCount(); ++h)
        {
            if (b.homTarget(h) != sp.right)
                continue;
            for (std::size_t i = 0; i < m.dim(q); ++i)
                for (std::size_t j = 0; j < b.dim(h); ++j)
                    builder.setRight(p, i, h, j, m.actRight(q, f.onHom(h), unitVector(i), column(f.homMap(h), j)));
        }
    }
    return builder.build();
}

Bimodule zeroBimodule(const GradedPtr& left, const GradedPtr& right, const SetBifunctor& carrier)
{
    return BimoduleBuilder(left, right, carrier).build();
}

/* ------------------------------------------------------------------ */

std::pair<SpaceId, QVector> TensorProduct::classOf(SpaceId first, const SparseVector& x, SpaceId second,
                                                  const SparseVector& y) const
{
    auto [p, k] = index.at({first, second});
    const Summand& s = summands[p][k];
    Accum acc;
    for (const auto& [a, u] : x)
        for (const auto& [b, w] : y)
            acc[s.offset + a * s.width + b] += u * w;
    return {p, quotients[p].project(fromAccum(acc))};
}

TensorProduct tensor(const Bimodule& m, const Bimodule& n)
{
    if (!sameGraded(m.right(), n.left()))
        throw Error("MiddleMismatch", "the right category of the first factor is not the left category of the second");
    const GradedCat& mid = *m.right();
    const FinCat& v = *mid.base();
    const SetBifunctor& s = m.carrier();
    const SetBifunctor& t = n.carrier();
    TensorProduct out;
    out.composite = composeBifunctors(s, t);
    BimoduleBuilder builder(m.left(), n.right(), out.composite.composite);
    std::size_t spaces = builder.spaceCount();
    std::vector<std::vector<std::pair<std::size_t, std::size_t> > > pairsOf(out.composite.composite.size());
    for (const auto& [st, c] : out.composite.classOf)
        pairsOf[c].push_back(st);
    out.summands.resize(spaces);
    std::vector<std::size_t> ambient(spaces, 0);
    for (SpaceId p = 0; p < spaces; ++p)
    {
        const Bimodule::Space& sp = builder.space(p);
        for (auto [e, f] : pairsOf[sp.element])
        {
            for (ObjId b : mid.fiber(s.element(e).right))
            {
                SpaceId mp = m.spaceId(e, b, sp.left);
                SpaceId np = n.spaceId(f, sp.right, b);
                out.index[{mp, np}] = {p, out.summands[p].size()};
                out.summands[p].push_back({mp, np, n.dim(np), ambient[p]});
                ambient[p] += m.dim(mp) * n.dim(np);
            }
        }
    }
    auto embed = [&](SpaceId mp, const SparseVector& x, SpaceId np, const SparseVector& y, const Rational& sign, Accum& acc) {
        auto [p, k] = out.index.at({mp, np});
        const TensorProduct::Summand& sm = out.summands[p][k];
        for (const auto& [a, u] : x)
            for (const auto& [b, w] : y)
                acc[sm.offset + a * sm.width + b] += sign * u * w;
        return p;
    };
    std::vector<std::vector<SparseVector> > relations(spaces);
    for (std::size_t e = 0; e < s.size(); ++e)
    {
        for (std::size_t f = 0; f < t.size(); ++f)
        {
            for (MorId w = 0; w < v.morphismCount(); ++w)
            {
                if (v.target(w) != s.element(e).right || v.source(w) != t.element(f).left)
                    continue;
                for (ObjId c : n.right()->fiber(t.element(f).right))
                    for (ObjId a : m.left()->fiber(s.element(e).left))
                        for (ObjId b : mid.fiber(v.source(w)))
                            for (ObjId b2 : mid.fiber(v.target(w)))
                            {
                                HomId h = mid.homId(w, b, b2);
                                SpaceId mp = m.spaceId(e, b2, a);
                                SpaceId np = n.spaceId(f, c, b);
                                SpaceId mpv = m.rightTarget(mp, h);
                                SpaceId vnp = n.leftTarget(h, np);
                                for (std::size_t i = 0; i < m.dim(mp); ++i)
                                    for (std::size_t k = 0; k < mid.dim(h); ++k)
                                        for (std::size_t j = 0; j < n.dim(np); ++j)
                                        {
                                            Accum acc;
                                            SpaceId p = embed(mpv, m.actRight(mp, h, unitVector(i), unitVector(k)), np,
                                                              unitVector(j), Rational(1), acc);
                                            embed(mp, unitVector(i), vnp, n.actLeft(h, np, unitVector(k), unitVector(j)),
                                                  Rational(-1), acc);
                                            SparseVector rel = fromAccum(acc);
                                            if (!rel.empty())
                                                relations[p].push_back(std::move(rel));
                                        }
                            }
            }
        }
    }
    struct Coordinate
    {
        SpaceId first;
        SpaceId second;
        std::size_t a;
        std::size_t b;
    };
    std::vector<std::vector<Coordinate> > basisOf(spaces);
    for (SpaceId p = 0; p < spaces; ++p)
    {
        out.quotients.emplace_back(ambient[p], relations[p]);
        std::vector<std::string> names;
        for (std::size_t q : out.quotients[p].basisCoordinates())
        {
            for (const TensorProduct::Summand& sm : out.summands[p])
            {
                if (q >= sm.offset && q < sm.offset + m.dim(sm.first) * sm.width)
                {
                    Coordinate c{sm.first, sm.second, (q - sm.offset) / sm.width, (q - sm.offset) % sm.width};
                    names.push_back(m.basisName(c.first, c.a) + "⊗" + n.basisName(c.second, c.b));
                    basisOf[p].push_back(c);
                    break;
                }
            }
        }
        builder.setBasis(p, names);
    }
    auto aFrom = homsFrom(*m.left());
    auto cInto = homsInto(*n.right());
    for (SpaceId p = 0; p < spaces; ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        for (std::size_t idx = 0; idx < basisOf[p].size(); ++idx)
        {
            const Coordinate& c = basisOf[p][idx];
            for (HomId h : aFrom[sp.left])
            {
                SpaceId target = m.leftTarget(h, c.first);
                for (std::size_t i = 0; i < m.left()->dim(h); ++i)
                {
                    auto [p2, x] = out.classOf(target, m.actLeft(h, c.first, unitVector(i), unitVector(c.a)), c.second,
                                               unitVector(c.b));
                    builder.setLeft(h, i, p, idx, toSparse(x));
                }
            }
            for (HomId h : cInto[sp.right])
            {
                SpaceId target = n.rightTarget(c.second, h);
                for (std::size_t k = 0; k < n.right()->dim(h); ++k)
                {
                    auto [p2, x] = out.classOf(c.first, unitVector(c.a), target,
                                               n.actRight(c.second, h, unitVector(c.b), unitVector(k)));
                    builder.setRight(p, idx, h, k, toSparse(x));
                }
            }
        }
    }
    out.module = builder.build();
    return out;
}

QMatrix HomBimodule::component(SpaceId p, const QVector& coords, SpaceId q) const
{
    QVector v(variables[p]);
    for (std::size_t k = 0; k < coords.size(); ++k)
        if (coords[k] != 0)
            for (std::size_t x = 0; x < v.size(); ++x)
                v[x] += coords[k] * basis[p][k][x];
    for (const Block& b : blocks[p])
        if (b.source == q)
            return blockMatrix(b, v);
    throw Error("NotComposable", "no component on the requested space");
}

namespace {

void checkSameShape(const Bimodule& m, const Bimodule& n)
{
    if (!sameGraded(m.left(), n.left()) || !sameGraded(m.right(), n.right()) || !m.carrier().sameAs(n.carrier()))
        throw Error("ShapeMismatch", "the bimodules have different categories or carriers");
}

void nameHomBasis(BimoduleBuilder& builder, const HomBimodule& out)
{
    for (SpaceId p = 0; p < out.basis.size(); ++p)
    {
        std::vector<std::string> names;
        for (std::size_t k = 0; k < out.basis[p].size(); ++k)
            names.push_back("f" + std::to_string(p) + "." + std::to_string(k));
        builder.setBasis(p, names);
    }
}

std::map<SpaceId, QMatrix> familyOf(const HomBimodule& h, SpaceId p, std::size_t k)
{
    std::map<SpaceId, QMatrix> out;
    for (const HomBimodule::Block& b : h.blocks[p])
        out[b.source] = blockMatrix(b, h.basis[p][k]);
    return out;
}

}   // namespace

HomBimodule homBimodule(const Bimodule& m, const Bimodule& n)
{
    checkSameShape(m, n);
    const GradedCat& a = *m.left();
    const GradedCat& b = *m.right();
    const FinCat& u = *a.base();
    const SetBifunctor& s = m.carrier();
    BimoduleBuilder builder(m.left(), m.left(), SetBifunctor::identity(a.base()));
    std::size_t spaces = builder.spaceCount();
    HomBimodule out;
    out.blocks.resize(spaces);
    out.basis.resize(spaces);
    out.variables.resize(spaces);
    std::vector<std::vector<SpaceId> > byLeft(a.objectCount());
    for (SpaceId q = 0; q < m.spaceCount(); ++q)
        byLeft[m.space(q).left].push_back(q);
    auto bInto = homsInto(b);
    for (SpaceId p = 0; p < spaces; ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        FamilySystem sys;
        for (SpaceId q : byLeft[sp.right])
        {
            SpaceId tq = n.spaceId(s.actLeft(sp.element, m.space(q).element), m.space(q).right, sp.left);
            sys.addBlock(q, tq, n.dim(tq), m.dim(q));
        }
        std::vector<HomBimodule::Block> blocks = sys.blocks();
        for (std::size_t k = 0; k < blocks.size(); ++k)
        {
            SpaceId q = blocks[k].source;
            SpaceId tq = blocks[k].target;
            for (HomId hb : bInto[m.space(q).right])
            {
                std::size_t k2 = sys.blockOf(m.rightTarget(q, hb));
                for (std::size_t c = 0; c < m.dim(q); ++c)
                    for (std::size_t kk = 0; kk < b.dim(hb); ++kk)
                        sys.addEquation({{k2, std::nullopt, m.actRight(q, hb, unitVector(c), unitVector(kk)), Rational(1)},
                                         {k, n.rightMatrix(tq, hb, unitVector(kk)), unitVector(c), Rational(-1)}},
                                        n.dim(blocks[k2].target));
            }
        }
        out.blocks[p] = blocks;
        out.variables[p] = sys.variables();
        out.basis[p] = sys.solve();
    }
    nameHomBasis(builder, out);
    HomCoordinates coords(out);
    auto aFrom = homsFrom(a);
    auto aInto = homsInto(a);
    for (SpaceId p = 0; p < spaces; ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        for (std::size_t k = 0; k < out.basis[p].size(); ++k)
        {
            auto family = familyOf(out, p, k);
            for (HomId hg : aFrom[sp.left])
            {
                SpaceId p2 = builder.spaceId(u.compose(a.homMorphism(hg), sp.element), sp.right, a.homTarget(hg));
                for (std::size_t i = 0; i < a.dim(hg); ++i)
                {
                    std::map<SpaceId, QMatrix> moved;
                    for (const HomBimodule::Block& bl : out.blocks[p])
                        moved[bl.source] = n.leftMatrix(hg, unitVector(i), bl.target) * family.at(bl.source);
                    builder.setLeft(hg, i, p, k, toSparse(coords.of(p2, moved)));
                }
            }
            for (HomId hg : aInto[sp.right])
            {
                SpaceId p2 = builder.spaceId(u.compose(sp.element, a.homMorphism(hg)), a.homSource(hg), sp.left);
                for (std::size_t i = 0; i < a.dim(hg); ++i)
                {
                    std::map<SpaceId, QMatrix> moved;
                    for (const HomBimodule::Block& bl : out.blocks[p2])
                        moved[bl.source] = family.at(m.leftTarget(hg, bl.source)) * m.leftMatrix(hg, unitVector(i), bl.source);
                    builder.setRight(p, k, hg, i, toSparse(coords.of(p2, moved)));
                }
            }
        }
    }
    out.module = builder.build();
    return out;
}

HomBimodule homOpBimodule(const Bimodule& m, const Bimodule& n)
{
    checkSameShape(m, n);
    const GradedCat& a = *m.left();
    const GradedCat& b = *m.right();
    const FinCat& v = *b.base();
    const SetBifunctor& s = m.carrier();
    BimoduleBuilder builder(m.right(), m.right(), SetBifunctor::identity(b.base()));
    std::size_t spaces = builder.spaceCount();
    HomBimodule out;
    out.blocks.resize(spaces);
    out.basis.resize(spaces);
    out.variables.resize(spaces);
    std::vector<std::vector<SpaceId> > byRight(b.objectCount());
    for (SpaceId q = 0; q < m.spaceCount(); ++q)
        byRight[m.space(q).right].push_back(q);
    auto aFrom = homsFrom(a);
    for (SpaceId p = 0; p < spaces; ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        FamilySystem sys;
        for (SpaceId q : byRight[sp.left])
        {
            SpaceId tq = n.spaceId(s.actRight(m.space(q).element, sp.element), sp.right, m.space(q).left);
            sys.addBlock(q, tq, n.dim(tq), m.dim(q));
        }
        std::vector<HomBimodule::Block> blocks = sys.blocks();
        for (std::size_t k = 0; k < blocks.size(); ++k)
        {
            SpaceId q = blocks[k].source;
            SpaceId tq = blocks[k].target;
            for (HomId ha : aFrom[m.space(q).left])
            {
                std::size_t k2 = sys.blockOf(m.leftTarget(ha, q));
                for (std::size_t c = 0; c < m.dim(q); ++c)
                    for (std::size_t kk = 0; kk < a.dim(ha); ++kk)
                        sys.addEquation({{k2, std::nullopt, m.actLeft(ha, q, unitVector(kk), unitVector(c)), Rational(1)},
                                         {k, n.leftMatrix(ha, unitVector(kk), tq), unitVector(c), Rational(-1)}},
                                        n.dim(blocks[k2].target));
            }
        }
        out.blocks[p] = blocks;
        out.variables[p] = sys.variables();
        out.basis[p] = sys.solve();
    }
    nameHomBasis(builder, out);
    HomCoordinates coords(out);
    auto bFrom = homsFrom(b);
    auto bInto = homsInto(b);
    for (SpaceId p = 0; p < spaces; ++p)
    {
        const Bimodule::Space sp = builder.space(p);
        for (std::size_t k = 0; k < out.basis[p].size(); ++k)
        {
            auto family = familyOf(out, p, k);
            for (HomId hb : bFrom[sp.left])
            {
                SpaceId p2 = builder.spaceId(v.compose(b.homMorphism(hb), sp.element), sp.right, b.homTarget(hb));
                for (std::size_t i = 0; i < b.dim(hb); ++i)
                {
                    std::map<SpaceId, QMatrix> moved;
                    for (const HomBimodule::Block& bl : out.blocks[p2])
                        moved[bl.source] = family.at(m.rightTarget(bl.source, hb)) * m.rightMatrix(bl.source, hb, unitVector(i));
                    builder.setLeft(hb, i, p, k, toSparse(coords.of(p2, moved)));
                }
            }
            for (HomId hb : bInto[sp.right])
            {
                SpaceId p2 = builder.spaceId(v.compose(sp.element, b.homMorphism(hb)), b.homSource(hb), sp.left);
                for (std::size_t i = 0; i < b.dim(hb); ++i)
                {
                    std::map<SpaceId, QMatrix> moved;
                    for (const HomBimodule::Block& bl : out.blocks[p])
                        moved[bl.source] = n.rightMatrix(bl.target, hb, unitVector(i)) * family.at(bl.source);
                    builder.setRight(p, k, hb, i, toSparse(coords.of(p2, moved)));
                }
            }
        }
    }
    out.module = builder.build();
    return out;
}

std::vector<QMatrix> actionMap(const Bimodule& m, const HomBimodule& endo)
{
    const GradedCat& a = *m.left();
    HomCoordinates coords(endo);
    std::vector<QMatrix> out;
    for (HomId h = 0; h < a.homCount(); ++h)
    {
        SpaceId p = endo.module.spaceId(a.homMorphism(h), a.homSource(h), a.homTarget(h));
        QMatrix mat(endo.module.dim(p), a.dim(h));
        for (std::size_t i = 0; i < a.dim(h); ++i)
        {
            std::map<SpaceId, QMatrix> family;
            for (const HomBimodule::Block& bl : endo.blocks[p])
                family[bl.source] = m.leftMatrix(h, unitVector(i), bl.source);
            QVector c = coords.of(p, family);
            for (std::size_t r = 0; r < c.size(); ++r)
                if (c[r] != 0)
                    mat.set(r, i, c[r]);
        }
        out.push_back(mat);
    }
    return out;
}

std::vector<std::vector<QMatrix> > morphismSpace(const Bimodule& m, const Bimodule& n,
                                                 const std::vector<std::size_t>& carrierMap)
{
    if (!sameGraded(m.left(), n.left()) || !sameGraded(m.right(), n.right()))
        throw Error("ShapeMismatch", "the bimodules have different categories");
    const GradedCat& a = *m.left();
    const GradedCat& b = *m.right();
    FamilySystem sys;
    for (SpaceId q = 0; q < m.spaceCount(); ++q)
    {
        const Bimodule::Space& sp = m.space(q);
        SpaceId tq = n.spaceId(carrierMap.at(sp.element), sp.right, sp.left);
        sys.addBlock(q, tq, n.dim(tq), m.dim(q));
    }
    auto aFrom = homsFrom(a);
    auto bInto = homsInto(b);
    std::vector<HomBimodule::Block> blocks = sys.blocks();
    for (std::size_t k = 0; k < blocks.size(); ++k)
    {
        SpaceId q = blocks[k].source;
        SpaceId tq = blocks[k].target;
        for (HomId ha : aFrom[m.space(q).left])
        {
            std::size_t k2 = sys.blockOf(m.leftTarget(ha, q));
            if (n.leftTarget(ha, tq) != blocks[k2].target)
                throw Error("ShapeMismatch", "the carrier map is not equivariant");
            for (std::size_t c = 0; c < m.dim(q); ++c)
                for (std::size_t kk = 0; kk < a.dim(ha); ++kk)
                    sys.addEquation({{k2, std::nullopt, m.actLeft(ha, q, unitVector(kk), unitVector(c)), Rational(1)},
                                     {k, n.leftMatrix(ha, unitVector(kk), tq), unitVector(c), Rational(-1)}},
                                    n.dim(blocks[k2].target));
        }
        for (HomId hb : bInto[m.space(q).right])
        {
            std::size_t k2 = sys.blockOf(m.rightTarget(q, hb));
            if (n.rightTarget(tq, hb) != blocks[k2].target)
                throw Error("ShapeMismatch", "the carrier map is not equivariant");
            for (std::size_t c = 0; c < m.dim(q); ++c)
                for (std::size_t kk = 0; kk < b.dim(hb); ++kk)
                    sys.addEquation({{k2, std::nullopt, m.actRight(q, hb, unitVector(c), unitVector(kk)), Rational(1)},
                                     {k, n.rightMatrix(tq, hb, unitVector(kk)), unitVector(c), Rational(-1)}},
                                    n.dim(blocks[k2].target));
        }
    }
    std::vector<std::vector<QMatrix> > out;
    for (const QVector& v : sys.solve())
    {
        std::vector<QMatrix> maps;
        for (const HomBimodule::Block& bl : blocks)
            maps.push_back(blockMatrix(bl, v));
        out.push_back(std::move(maps));
    }
    return out;
}

/* ------------------------------------------------------------------ */

namespace {

/**
 * Copy of m keeping the spaces whose element is flagged; actions landing
 * outside are dropped.
 */
Bimodule keepSpaces(const Bimodule& m, const std::vector<char>& keep)
{
    BimoduleBuilder builder(m.left(), m.right(), m.carrier());
    auto kept = [&](SpaceId p) { return keep[m.space(p).element] != 0; };
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        std::vector<std::string> names;
        if (kept(p))
            for (std::size_t i = 0; i < m.dim(p); ++i)
                names.push_back(m.basisName(p, i));
        builder.setBasis(p, names);
    }
    auto aFrom = homsFrom(*m.left());
    auto bInto = homsInto(*m.right());
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        if (!kept(p))
            continue;
        for (HomId h : aFrom[m.space(p).left])
        {
            if (!kept(m.leftTarget(h, p)))
                continue;
            const auto& c = m.leftConstants(h, p);
            for (std::size_t i = 0; i < m.left()->dim(h); ++i)
                for (std::size_t j = 0; j < m.dim(p); ++j)
                    builder.setLeft(h, i, p, j, c[i * m.dim(p) + j]);
        }
        for (HomId h : bInto[m.space(p).right])
        {
            if (!kept(m.rightTarget(p, h)))
                continue;
            const auto& c = m.rightConstants(p, h);
            std::size_t dh = m.right()->dim(h);
            for (std::size_t i = 0; i < m.dim(p); ++i)
                for (std::size_t j = 0; j < dh; ++j)
                    builder.setRight(p, i, h, j, c[i * dh + j]);
        }
    }
    return builder.build();
}

}   // namespace

Bimodule supportedOn(const Bimodule& m, const std::vector<char>& ideal)
{
    if (!m.overIdentity())
        throw Error("ShapeMismatch", "support needs a bimodule over the identity bifunctor");
    if (!isIdeal(*m.left()->base(), ideal))
        throw Error("NotAnIdeal", "the morphism set is not closed under composition with arbitrary morphisms");
    return keepSpaces(m, ideal);
}

SupportSplit supportSplit(const Bimodule& m, const std::vector<char>& ideal, const Subcategory& complement)
{
    if (!m.overIdentity())
        throw Error("ShapeMismatch", "support needs a bimodule over the identity bifunctor");
    if (!decompositionCheck(*m.left()->base(), ideal, complement))
        throw Error("NotADecomposition", "the ideal and the subcategory do not partition the morphisms");
    SupportSplit out;
    out.supported = keepSpaces(m, ideal);
    out.quotient = keepSpaces(m, complement.morphisms);
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        std::size_t d = m.dim(p);
        bool inIdeal = ideal[m.space(p).element] != 0;
        out.inclusion.push_back(inIdeal ? QMatrix::identity(d) : QMatrix(d, 0));
        out.projection.push_back(inIdeal ? QMatrix(0, d) : QMatrix::identity(d));
    }
    return out;
}

/* ------------------------------------------------------------------ */

ArrowGraded arrowCategory(const Bimodule& m)
{
    const GradedCat& a = *m.left();
    const GradedCat& b = *m.right();
    ArrowGraded out;
    out.base = arrowCategoryBase(m.carrier());
    const FinCat& w = *out.base.category;
    GradedBuilder builder(out.base.category);

    std::set<std::string> objectNames;
    bool objectClash = false;
    for (ObjId y = 0; y < b.objectCount(); ++y)
        objectNames.insert(b.objectName(y));
    for (ObjId x = 0; x < a.objectCount(); ++x)
        objectClash = objectClash || objectNames.count(a.objectName(x)) > 0;
    for (ObjId y = 0; y < b.objectCount(); ++y)
        builder.addObject((objectClash ? "b." : "") + b.objectName(y), out.base.fromRight.onObject(b.over(y)));
    for (ObjId x = 0; x < a.objectCount(); ++x)
        builder.addObject((objectClash ? "a." : "") + a.objectName(x), out.base.fromLeft.onObject(a.over(x)));
    builder.freezeObjects();
    std::size_t nb = b.objectCount();

    std::vector<HomId> fromB(b.homCount());
    std::vector<HomId> fromA(a.homCount());
    std::vector<HomId> fromM(m.spaceCount());
    for (HomId h = 0; h < b.homCount(); ++h)
        fromB[h] = builder.homId(out.base.fromRight.onMorphism(b.homMorphism(h)), b.homSource(h), b.homTarget(h));
    for (HomId h = 0; h < a.homCount(); ++h)
        fromA[h] = builder.homId(out.base.fromLeft.onMorphism(a.homMorphism(h)), nb + a.homSource(h), nb + a.homTarget(h));
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
        fromM[p] = builder.homId(out.base.crossMorphism[m.space(p).element], m.space(p).right, nb + m.space(p).left);

    std::multiset<std::string> allNames;
    for (HomId h = 0; h < b.homCount(); ++h)
        for (std::size_t i = 0; i < b.dim(h); ++i)
            allNames.insert(b.basisName(h, i));
    for (HomId h = 0; h < a.homCount(); ++h)
        for (std::size_t i = 0; i < a.dim(h); ++i)
            allNames.insert(a.basisName(h, i));
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
        for (std::size_t i = 0; i < m.dim(p); ++i)
            allNames.insert(m.basisName(p, i));
    bool basisClash = std::adjacent_find(allNames.begin(), allNames.end()) != allNames.end();
    std::set<std::string> used;
    auto name = [&](const char* prefix, const std::string& n) { return uniqueName(used, (basisClash ? prefix : "") + n); };
    for (HomId h = 0; h < b.homCount(); ++h)
    {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < b.dim(h); ++i)
            names.push_back(name("b.", b.basisName(h, i)));
        builder.setBasis(fromB[h], names);
    }
    for (HomId h = 0; h < a.homCount(); ++h)
    {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < a.dim(h); ++i)
            names.push_back(name("a.", a.basisName(h, i)));
        builder.setBasis(fromA[h], names);
    }
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < m.dim(p); ++i)
            names.push_back(name("M.", m.basisName(p, i)));
        builder.setBasis(fromM[p], names);
    }

    auto aFrom = homsFrom(a);
    auto bFrom = homsFrom(b);
    auto bInto = homsInto(b);
    for (HomId f = 0; f < b.homCount(); ++f)
        for (HomId g : bFrom[b.homTarget(f)])
            for (std::size_t i = 0; i < b.dim(g); ++i)
                for (std::size_t j = 0; j < b.dim(f); ++j)
                    builder.setProduct(fromB[g], i, fromB[f], j, b.product(g, f)[i * b.dim(f) + j]);
    for (HomId f = 0; f < a.homCount(); ++f)
        for (HomId g : aFrom[a.homTarget(f)])
            for (std::size_t i = 0; i < a.dim(g); ++i)
                for (std::size_t j = 0; j < a.dim(f); ++j)
                    builder.setProduct(fromA[g], i, fromA[f], j, a.product(g, f)[i * a.dim(f) + j]);
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        for (HomId h : aFrom[m.space(p).left])
        {
            const auto& c = m.leftConstants(h, p);
            for (std::size_t i = 0; i < a.dim(h); ++i)
                for (std::size_t j = 0; j < m.dim(p); ++j)
                    builder.setProduct(fromA[h], i, fromM[p], j, c[i * m.dim(p) + j]);
        }
        for (HomId h : bInto[m.space(p).right])
        {
            const auto& c = m.rightConstants(p, h);
            for (std::size_t i = 0; i < m.dim(p); ++i)
                for (std::size_t j = 0; j < b.dim(h); ++j)
                    builder.setProduct(fromM[p], i, fromB[h], j, c[i * b.dim(h) + j]);
        }
    }
    for (ObjId y = 0; y < b.objectCount(); ++y)
        builder.setUnit(y, b.unit(y));
    for (ObjId x = 0; x < a.objectCount(); ++x)
        builder.setUnit(nb + x, a.unit(x));
    out.category = builder.build();

    std::vector<ObjId> objB(b.objectCount());
    std::vector<ObjId> objA(a.objectCount());
    for (ObjId y = 0; y < b.objectCount(); ++y)
        objB[y] = y;
    for (ObjId x = 0; x < a.objectCount(); ++x)
        objA[x] = nb + x;
    std::vector<QMatrix> mapsB;
    std::vector<QMatrix> mapsA;
    for (HomId h = 0; h < b.homCount(); ++h)
        mapsB.push_back(QMatrix::identity(b.dim(h)));
    for (HomId h = 0; h < a.homCount(); ++h)
        mapsA.push_back(QMatrix::identity(a.dim(h)));
    out.fromRight = GradedFunctor::make(m.right(), out.category, out.base.fromRight, objB, mapsB);
    out.fromLeft = GradedFunctor::make(m.left(), out.category, out.base.fromLeft, objA, mapsA);
    out.crossIdeal.assign(w.morphismCount(), 0);
    for (MorId c : out.base.crossMorphism)
        out.crossIdeal[c] = 1;
    return out;
}

}   // namespace mgc
