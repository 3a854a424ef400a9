/**
 * Graded categories, graded functors and the constructions on them.
 */

#include "mgc/graded.hpp"

#include <set>
#include <sstream>

namespace mgc {

namespace {

struct SharpBase
{
    CatPtr sharp;
    Functor toBase;
    std::vector<std::tuple<MorId, ObjId, ObjId> > homs;
    std::map<std::tuple<MorId, ObjId, ObjId>, HomId> index;
};

/**
 * U# for a base with the given fiber objects.  Hom triples are listed by
 * base morphism, then source, then target object.
 */
SharpBase makeSharpBase(const CatPtr& base, const std::vector<std::string>& names, const std::vector<ObjId>& over)
{
    const FinCat& u = *base;
    std::vector<std::vector<ObjId> > fibers(u.objectCount());
    for (ObjId a = 0; a < over.size(); ++a)
        fibers[over[a]].push_back(a);
    SharpBase out;
    for (MorId m = 0; m < u.morphismCount(); ++m)
    {
        for (ObjId a : fibers[u.source(m)])
        {
            for (ObjId b : fibers[u.target(m)])
            {
                out.index[{m, a, b}] = out.homs.size();
                out.homs.emplace_back(m, a, b);
            }
        }
    }
    RawCategory raw;
    raw.objects = names;
    for (const auto& [m, a, b] : out.homs)
        raw.morphisms.push_back({u.morphismName(m) + "[" + names[a] + "," + names[b] + "]", names[a], names[b]});
    for (ObjId a = 0; a < names.size(); ++a)
        raw.identities[names[a]] = raw.morphisms[out.index.at({u.identity(over[a]), a, a})].name;
    for (HomId f = 0; f < out.homs.size(); ++f)
    {
        const auto& [mf, af, bf] = out.homs[f];
        for (MorId mg : u.outgoing(u.target(mf)))
        {
            for (ObjId c : fibers[u.target(mg)])
            {
                HomId g = out.index.at({mg, bf, c});
                HomId gf = out.index.at({u.compose(mg, mf), af, c});
                raw.compositions.push_back({raw.morphisms[g].name, raw.morphisms[f].name, raw.morphisms[gf].name});
            }
        }
    }
    out.sharp = FinCat::fromRaw(raw);
    std::vector<MorId> morMap;
    for (const auto& h : out.homs)
        morMap.push_back(std::get<0>(h));
    out.toBase = Functor::make(out.sharp, base, over, morMap);
    return out;
}

/**
 * Unit and associativity laws of an assembled graded category.
 */
std::vector<Violation> lawViolations(const GradedCat& c)
{
    std::vector<Violation> out;
    const FinCat& s = *c.sharp();
    for (HomId h = 0; h < c.homCount(); ++h)
    {
        HomId left = s.identity(s.target(h));
        HomId right = s.identity(s.source(h));
        for (std::size_t i = 0; i < c.dim(h); ++i)
        {
            SparseVector e{{i, Rational(1)}};
            if (c.compose(left, h, c.unit(s.target(h)), e) != e)
                out.push_back({"BadIdentity", "BadIdentity(" + c.objectName(s.target(h)) + ", " + c.basisName(h, i) + ")"});
            else if (c.compose(h, right, e, c.unit(s.source(h))) != e)
                out.push_back({"BadIdentity", "BadIdentity(" + c.objectName(s.source(h)) + ", " + c.basisName(h, i) + ")"});
        }
    }
    for (HomId f = 0; f < c.homCount(); ++f)
    {
        if (c.dim(f) == 0)
            continue;
        for (HomId g : s.outgoing(s.target(f)))
        {
            if (c.dim(g) == 0)
                continue;
            HomId gf = s.compose(g, f);
            for (HomId h : s.outgoing(s.target(g)))
            {
                if (c.dim(h) == 0)
                    continue;
                HomId hg = s.compose(h, g);
                for (std::size_t k = 0; k < c.dim(h); ++k)
                {
                    SparseVector z{{k, Rational(1)}};
                    for (std::size_t j = 0; j < c.dim(g); ++j)
                    {
                        SparseVector y{{j, Rational(1)}};
                        SparseVector zy = c.compose(h, g, z, y);
                        for (std::size_t i = 0; i < c.dim(f); ++i)
                        {
                            SparseVector x{{i, Rational(1)}};
                            if (c.compose(hg, f, zy, x) != c.compose(h, gf, z, c.compose(g, f, y, x)))
                            {
                                out.push_back({"NonAssociative", "NonAssociative(" + c.basisName(h, k) + ", " +
                                               c.basisName(g, j) + ", " + c.basisName(f, i) + ")"});
                                if (out.size() > 16)
                                    return out;
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

bool sameBaseStructure(const FinCat& a, const FinCat& b)
{
    if (a.objectCount() != b.objectCount() || a.morphismCount() != b.morphismCount())
        return false;
    for (ObjId x = 0; x < a.objectCount(); ++x)
        if (a.identity(x) != b.identity(x))
            return false;
    for (MorId f = 0; f < a.morphismCount(); ++f)
    {
        if (a.source(f) != b.source(f) || a.target(f) != b.target(f))
            return false;
        for (MorId g : a.outgoing(a.target(f)))
            if (a.compose(g, f) != b.compose(g, f))
                return false;
    }
    return true;
}

}   // namespace

/* ------------------------------------------------------------------ */

std::vector<Violation> GradedCat::check(const RawGradedCategory& raw)
{
    std::vector<Violation> out = FinCat::check(raw.base);
    if (!out.empty())
        return out;
    try
    {
        GradedPtr c = fromRaw(raw);
        (void)c;
    }
    catch (const Error& e)
    {
        // fromRaw reports every violation joined in the detail; split it back.
        std::string detail = e.detail();
        std::size_t start = 0;
        while (start <= detail.size())
        {
            std::size_t end = detail.find("; ", start);
            std::string part = detail.substr(start, end == std::string::npos ? std::string::npos : end - start);
            std::string code = part.substr(0, part.find('('));
            out.push_back({code, part});
            if (end == std::string::npos)
                break;
            start = end + 2;
        }
    }
    return out;
}

GradedPtr GradedCat::fromRaw(const RawGradedCategory& raw)
{
    std::vector<Violation> bad;
    auto flush = [&]() {
        if (bad.empty())
            return;
        std::string detail;
        for (std::size_t i = 0; i < bad.size(); ++i)
            detail += (i ? "; " : "") + bad[i].detail;
        throw Error(bad.front().code, detail);
    };

    CatPtr base = FinCat::fromRaw(raw.base);
    auto c = std::make_shared<GradedCat>();
    c->base_ = base;

    std::vector<std::vector<std::string> > byBase(base->objectCount());
    std::set<std::string> seenBase;
    for (const auto& [x, objs] : raw.fibers)
    {
        auto id = base->findObject(x);
        if (!id)
        {
            bad.push_back({"UnknownName", "UnknownName(fiber over " + x + ")"});
            continue;
        }
        if (!seenBase.insert(x).second)
            bad.push_back({"DuplicateName", "DuplicateName(fiber over " + x + ")"});
        byBase[*id] = objs;
    }
    std::map<std::string, ObjId> objectIndex;
    c->fibers_.assign(base->objectCount(), {});
    for (ObjId x = 0; x < base->objectCount(); ++x)
    {
        for (const std::string& name : byBase[x])
        {
            ObjId a = c->objectNames_.size();
            if (!objectIndex.emplace(name, a).second)
                bad.push_back({"DuplicateName", "DuplicateName(object " + name + ")"});
            c->objectNames_.push_back(name);
            c->over_.push_back(x);
            c->fibers_[x].push_back(a);
        }
    }
    flush();

    SharpBase sb = makeSharpBase(base, c->objectNames_, c->over_);
    c->sharp_ = sb.sharp;
    c->sharpToBase_ = sb.toBase;
    c->homIndex_ = sb.index;
    std::size_t nh = sb.homs.size();
    c->dims_.assign(nh, 0);
    c->basisNames_.assign(nh, {});

    std::map<std::string, std::pair<HomId, std::size_t> > basisIndex;
    std::set<HomId> declared;
    for (const auto& hom : raw.homs)
    {
        auto m = base->findMorphism(hom.morphism);
        auto a = objectIndex.find(hom.source);
        auto b = objectIndex.find(hom.target);
        if (!m || a == objectIndex.end() || b == objectIndex.end())
        {
            bad.push_back({"UnknownName", "UnknownName(hom " + hom.morphism + ": " + hom.source + " -> " + hom.target + ")"});
            continue;
        }
        auto it = sb.index.find({*m, a->second, b->second});
        if (it == sb.index.end())
        {
            bad.push_back({"BadEndpoints", "BadEndpoints(hom " + hom.morphism + ": " + hom.source + " -> " + hom.target + ")"});
            continue;
        }
        if (!declared.insert(it->second).second)
        {
            bad.push_back({"DuplicateName", "DuplicateName(hom " + hom.morphism + ": " + hom.source + " -> " + hom.target + ")"});
            continue;
        }
        c->dims_[it->second] = hom.basis.size();
        c->basisNames_[it->second] = hom.basis;
        for (std::size_t i = 0; i < hom.basis.size(); ++i)
            if (!basisIndex.emplace(hom.basis[i], std::make_pair(it->second, i)).second)
                bad.push_back({"DuplicateName", "DuplicateName(basis " + hom.basis[i] + ")"});
    }
    flush();

    const FinCat& s = *c->sharp_;
    c->products_.assign(nh * nh, {});
    for (HomId f = 0; f < nh; ++f)
        for (HomId g : s.outgoing(s.target(f)))
            c->products_[g * nh + f].assign(c->dims_[g] * c->dims_[f], {});
    std::set<std::pair<std::string, std::string> > seenProducts;
    for (const auto& p : raw.products)
    {
        auto l = basisIndex.find(p.left);
        auto r = basisIndex.find(p.right);
        if (l == basisIndex.end() || r == basisIndex.end())
        {
            bad.push_back({"UnknownName", "UnknownName(product " + p.left + " ∘ " + p.right + ")"});
            continue;
        }
        auto [g, i] = l->second;
        auto [f, j] = r->second;
        if (s.source(g) != s.target(f))
        {
            bad.push_back({"NotComposable", "NotComposable(" + p.left + ", " + p.right + ")"});
            continue;
        }
        if (!seenProducts.insert({p.left, p.right}).second)
        {
            bad.push_back({"ConflictingComposite", "ConflictingComposite(" + p.left + ", " + p.right + ")"});
            continue;
        }
        HomId gf = s.compose(g, f);
        std::map<std::size_t, Rational> acc;
        for (const RawTerm& t : p.result)
        {
            auto k = basisIndex.find(t.basis);
            if (k == basisIndex.end() || k->second.first != gf)
            {
                bad.push_back({"BadEndpoints", "BadEndpoints(" + p.left + " ∘ " + p.right + " has term " + t.basis + ")"});
                continue;
            }
            acc[k->second.second] += t.coeff;
        }
        SparseVector v;
        for (const auto& [k, x] : acc)
            if (x != 0)
                v.emplace_back(k, x);
        c->products_[g * nh + f][i * c->dims_[f] + j] = v;
    }
    c->units_.assign(c->objectCount(), {});
    for (const auto& [name, terms] : raw.units)
    {
        auto a = objectIndex.find(name);
        if (a == objectIndex.end())
        {
            bad.push_back({"UnknownName", "UnknownName(unit of " + name + ")"});
            continue;
        }
        HomId id = s.identity(a->second);
        std::map<std::size_t, Rational> acc;
        for (const RawTerm& t : terms)
        {
            auto k = basisIndex.find(t.basis);
            if (k == basisIndex.end() || k->second.first != id)
            {
                bad.push_back({"BadIdentity", "BadIdentity(" + name + ": term " + t.basis + " is not an endomorphism)"});
                continue;
            }
            acc[k->second.second] += t.coeff;
        }
        for (const auto& [k, x] : acc)
            if (x != 0)
                c->units_[a->second].emplace_back(k, x);
    }
    flush();
    bad = lawViolations(*c);
    flush();
    return c;
}

HomId GradedCat::homId(MorId u, ObjId a, ObjId b) const
{
    auto it = homIndex_.find({u, a, b});
    if (it == homIndex_.end())
        throw Error("BadEndpoints", "no hom space over " + base_->morphismName(u) + " from " + objectNames_.at(a) +
                                    " to " + objectNames_.at(b));
    return it->second;
}

const std::vector<SparseVector>& GradedCat::product(HomId g, HomId f) const
{
    if (sharp_->source(g) != sharp_->target(f))
        throw Error("NotComposable", sharp_->morphismName(g) + " ∘ " + sharp_->morphismName(f));
    return products_[g * homCount() + f];
}

SparseVector GradedCat::compose(HomId g, HomId f, const SparseVector& x, const SparseVector& y) const
{
    const std::vector<SparseVector>& table = product(g, f);
    if (x.empty() || y.empty())
        return {};
    std::size_t df = dims_[f];
    QVector acc(dims_[sharp_->compose(g, f)]);
    for (const auto& [i, xi] : x)
    {
        for (const auto& [j, yj] : y)
        {
            Rational c = xi * yj;
            for (const auto& [k, v] : table[i * df + j])
                acc[k] += c * v;
        }
    }
    return toSparse(acc);
}

RawGradedCategory GradedCat::toRaw() const
{
    RawGradedCategory raw;
    raw.base = base_->toRaw();
    for (ObjId x = 0; x < base_->objectCount(); ++x)
    {
        std::vector<std::string> names;
        for (ObjId a : fibers_[x])
            names.push_back(objectNames_[a]);
        raw.fibers.emplace_back(base_->objectName(x), names);
    }
    for (HomId h = 0; h < homCount(); ++h)
    {
        if (dims_[h] == 0)
            continue;
        raw.homs.push_back({base_->morphismName(homMorphism(h)), objectNames_[homSource(h)], objectNames_[homTarget(h)],
                            basisNames_[h]});
    }
    const FinCat& s = *sharp_;
    for (HomId g = 0; g < homCount(); ++g)
    {
        for (HomId f = 0; f < homCount(); ++f)
        {
            if (s.source(g) != s.target(f))
                continue;
            HomId gf = s.compose(g, f);
            const auto& table = products_[g * homCount() + f];
            for (std::size_t i = 0; i < dims_[g]; ++i)
            {
                for (std::size_t j = 0; j < dims_[f]; ++j)
                {
                    const SparseVector& v = table[i * dims_[f] + j];
                    if (v.empty())
                        continue;
                    RawGradedCategory::Product p{basisNames_[g][i], basisNames_[f][j], {}};
                    for (const auto& [k, x] : v)
                        p.result.push_back({basisNames_[gf][k], x});
                    raw.products.push_back(p);
                }
            }
        }
    }
    for (ObjId a = 0; a < objectCount(); ++a)
    {
        std::vector<RawTerm> terms;
        HomId id = s.identity(a);
        for (const auto& [k, x] : units_[a])
            terms.push_back({basisNames_[id][k], x});
        raw.units.emplace_back(objectNames_[a], terms);
    }
    return raw;
}

/* ------------------------------------------------------------------ */

GradedBuilder::GradedBuilder(CatPtr base) : base_(std::move(base)) {}

ObjId GradedBuilder::addObject(const std::string& name, ObjId over)
{
    if (frozen_)
        throw Error("BuilderState", "objects are frozen");
    objectNames_.push_back(name);
    over_.push_back(over);
    return objectNames_.size() - 1;
}

void GradedBuilder::freezeObjects()
{
    if (frozen_)
        return;
    frozen_ = true;
    // Objects are kept in insertion order; the graded category orders them
    // by base object, so insertion must already be grouped that way.
    for (std::size_t a = 1; a < over_.size(); ++a)
        if (over_[a] < over_[a - 1])
            throw Error("BuilderState", "objects must be added in base object order");
    const FinCat& u = *base_;
    std::vector<std::vector<ObjId> > fibers(u.objectCount());
    for (ObjId a = 0; a < over_.size(); ++a)
        fibers[over_[a]].push_back(a);
    for (MorId m = 0; m < u.morphismCount(); ++m)
        for (ObjId a : fibers[u.source(m)])
            for (ObjId b : fibers[u.target(m)])
            {
                homIndex_[{m, a, b}] = homs_.size();
                homs_.emplace_back(m, a, b);
            }
    basis_.assign(homs_.size(), {});
    units_.assign(objectNames_.size(), {});
}

HomId GradedBuilder::homId(MorId u, ObjId a, ObjId b) const
{
    return homIndex_.at({u, a, b});
}

void GradedBuilder::setBasis(HomId h, std::vector<std::string> names)
{
    basis_.at(h) = std::move(names);
}

void GradedBuilder::setProduct(HomId g, std::size_t i, HomId f, std::size_t j, SparseVector value)
{
    products_[{g, i, f, j}] = std::move(value);
}

void GradedBuilder::setUnit(ObjId a, SparseVector value)
{
    units_.at(a) = std::move(value);
}

GradedPtr GradedBuilder::build() const
{
    if (!frozen_)
        throw Error("BuilderState", "objects not frozen");
    const FinCat& u = *base_;
    RawGradedCategory raw;
    raw.base = u.toRaw();
    for (ObjId x = 0; x < u.objectCount(); ++x)
    {
        std::vector<std::string> names;
        for (ObjId a = 0; a < over_.size(); ++a)
            if (over_[a] == x)
                names.push_back(objectNames_[a]);
        raw.fibers.emplace_back(u.objectName(x), names);
    }
    for (HomId h = 0; h < homs_.size(); ++h)
    {
        if (basis_[h].empty())
            continue;
        const auto& [m, a, b] = homs_[h];
        raw.homs.push_back({u.morphismName(m), objectNames_[a], objectNames_[b], basis_[h]});
    }
    for (const auto& [key, value] : products_)
    {
        const auto& [g, i, f, j] = key;
        if (value.empty())
            continue;
        const auto& [mg, ag, bg] = homs_[g];
        const auto& [mf, af, bf] = homs_[f];
        (void)ag;
        (void)bf;
        HomId gf = homIndex_.at({u.compose(mg, mf), af, bg});
        RawGradedCategory::Product p{basis_[g].at(i), basis_[f].at(j), {}};
        for (const auto& [k, x] : value)
            p.result.push_back({basis_[gf].at(k), x});
        raw.products.push_back(p);
    }
    for (ObjId a = 0; a < objectNames_.size(); ++a)
    {
        HomId id = homIndex_.at({u.identity(over_[a]), a, a});
        std::vector<RawTerm> terms;
        for (const auto& [k, x] : units_[a])
            terms.push_back({basis_[id].at(k), x});
        raw.units.emplace_back(objectNames_[a], terms);
    }
    return GradedCat::fromRaw(raw);
}

std::optional<std::string> structuralDifference(const GradedCat& a, const GradedCat& b)
{
    if (!sameBaseStructure(*a.base(), *b.base()))
        return "base categories differ";
    if (a.objectCount() != b.objectCount())
        return "object counts differ";
    for (ObjId x = 0; x < a.objectCount(); ++x)
        if (a.over(x) != b.over(x))
            return "object " + a.objectName(x) + " lies over different base objects";
    for (HomId h = 0; h < a.homCount(); ++h)
        if (a.dim(h) != b.dim(h))
            return "hom dimension differs at " + a.sharp()->morphismName(h);
    const FinCat& s = *a.sharp();
    for (HomId f = 0; f < a.homCount(); ++f)
        for (HomId g : s.outgoing(s.target(f)))
            if (a.product(g, f) != b.product(g, f))
                return "structure constants differ at " + s.morphismName(g) + " ∘ " + s.morphismName(f);
    for (ObjId x = 0; x < a.objectCount(); ++x)
        if (a.unit(x) != b.unit(x))
            return "unit differs at " + a.objectName(x);
    return std::nullopt;
}

/* ------------------------------------------------------------------ */

GradedFunctor GradedFunctor::make(GradedPtr source, GradedPtr target, Functor base,
                                  std::vector<ObjId> objectMap, std::vector<QMatrix> homMaps)
{
    const GradedCat& b = *source;
    const GradedCat& a = *target;
    auto fail = [](const std::string& why) { throw Error("InvalidFunctor", why); };
    if (!base.source()->sameAs(*b.base()) || !base.target()->sameAs(*a.base()))
        fail("base functor does not match the graded bases");
    if (objectMap.size() != b.objectCount() || homMaps.size() != b.homCount())
        fail("object or hom map has the wrong size");
    for (ObjId x = 0; x < b.objectCount(); ++x)
        if (objectMap[x] >= a.objectCount() || a.over(objectMap[x]) != base.onObject(b.over(x)))
            fail("object " + b.objectName(x) + " is sent outside the fiber over its base image");
    std::vector<MorId> morMap;
    for (HomId h = 0; h < b.homCount(); ++h)
        morMap.push_back(a.homId(base.onMorphism(b.homMorphism(h)), objectMap[b.homSource(h)], objectMap[b.homTarget(h)]));
    Functor sharp = Functor::make(b.sharp(), a.sharp(), objectMap, morMap);
    for (HomId h = 0; h < b.homCount(); ++h)
        if (homMaps[h].rows() != a.dim(morMap[h]) || homMaps[h].cols() != b.dim(h))
            fail("hom map has the wrong shape at " + b.sharp()->morphismName(h));
    auto apply = [&](HomId h, const SparseVector& v) { return toSparse(homMaps[h].apply(toDense(v, b.dim(h)))); };
    const FinCat& s = *b.sharp();
    for (ObjId x = 0; x < b.objectCount(); ++x)
        if (apply(s.identity(x), b.unit(x)) != a.unit(objectMap[x]))
            fail("unit not preserved at " + b.objectName(x));
    for (HomId f = 0; f < b.homCount(); ++f)
    {
        for (HomId g : s.outgoing(s.target(f)))
        {
            HomId gf = s.compose(g, f);
            for (std::size_t i = 0; i < b.dim(g); ++i)
            {
                for (std::size_t j = 0; j < b.dim(f); ++j)
                {
                    SparseVector x{{i, Rational(1)}};
                    SparseVector y{{j, Rational(1)}};
                    if (apply(gf, b.compose(g, f, x, y)) != a.compose(morMap[g], morMap[f], apply(g, x), apply(f, y)))
                        fail("composition not preserved at " + b.basisName(g, i) + " ∘ " + b.basisName(f, j));
                }
            }
        }
    }
    GradedFunctor out;
    out.source_ = std::move(source);
    out.target_ = std::move(target);
    out.base_ = std::move(base);
    out.objects_ = std::move(objectMap);
    out.homMaps_ = std::move(homMaps);
    out.sharp_ = std::move(sharp);
    return out;
}

GradedFunctor GradedFunctor::identity(const GradedPtr& a)
{
    std::vector<ObjId> obj(a->objectCount());
    for (ObjId x = 0; x < obj.size(); ++x)
        obj[x] = x;
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < a->homCount(); ++h)
        maps.push_back(QMatrix::identity(a->dim(h)));
    return make(a, a, Functor::identity(a->base()), obj, maps);
}

GradedFunctor GradedFunctor::compose(const GradedFunctor& g, const GradedFunctor& f)
{
    std::vector<ObjId> obj;
    for (ObjId x : f.objects_)
        obj.push_back(g.objects_[x]);
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < f.source_->homCount(); ++h)
        maps.push_back(g.homMaps_[f.onHom(h)] * f.homMaps_[h]);
    return make(f.source_, g.target_, Functor::compose(g.base_, f.base_), obj, maps);
}

bool GradedFunctor::isSubcartesian() const
{
    for (const QMatrix& m : homMaps_)
        if (!isInvertible(m))
            return false;
    return true;
}

bool GradedFunctor::isCartesian() const
{
    if (!isSubcartesian())
        return false;
    const GradedCat& b = *source_;
    const GradedCat& a = *target_;
    for (ObjId y = 0; y < b.base()->objectCount(); ++y)
    {
        std::set<ObjId> image;
        for (ObjId x : b.fiber(y))
            image.insert(objects_[x]);
        if (image.size() != b.fiber(y).size() || image.size() != a.fiber(base_.onObject(y)).size())
            return false;
    }
    return true;
}

/* ------------------------------------------------------------------ */

GradedMap sharpOf(const GradedPtr& a)
{
    GradedBuilder b(a->sharp());
    for (ObjId x = 0; x < a->objectCount(); ++x)
        b.addObject(a->objectName(x), x);
    b.freezeObjects();
    const FinCat& s = *a->sharp();
    for (HomId h = 0; h < a->homCount(); ++h)
    {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < a->dim(h); ++i)
            names.push_back(a->basisName(h, i));
        b.setBasis(b.homId(h, s.source(h), s.target(h)), names);
    }
    for (HomId f = 0; f < a->homCount(); ++f)
        for (HomId g : s.outgoing(s.target(f)))
            for (std::size_t i = 0; i < a->dim(g); ++i)
                for (std::size_t j = 0; j < a->dim(f); ++j)
                    b.setProduct(g, i, f, j, a->product(g, f)[i * a->dim(f) + j]);
    for (ObjId x = 0; x < a->objectCount(); ++x)
        b.setUnit(x, a->unit(x));
    GradedMap out;
    out.category = b.build();
    std::vector<ObjId> obj(a->objectCount());
    for (ObjId x = 0; x < obj.size(); ++x)
        obj[x] = x;
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < a->homCount(); ++h)
        maps.push_back(QMatrix::identity(a->dim(h)));
    out.functor = GradedFunctor::make(out.category, a, a->sharpToBase(), obj, maps);
    return out;
}

GradedFunctor sharpOfFunctor(const GradedFunctor& f, const GradedMap& sharpSource, const GradedMap& sharpTarget)
{
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < f.source()->homCount(); ++h)
        maps.push_back(f.homMap(h));
    Functor base = Functor::make(sharpSource.category->base(), sharpTarget.category->base(),
                                 f.sharpFunctor().objectMap(), f.sharpFunctor().morphismMap());
    return GradedFunctor::make(sharpSource.category, sharpTarget.category, base, f.objectMap(), maps);
}

GradedMap restrictGraded(const GradedPtr& a, const Functor& phi)
{
    const FinCat& v = *phi.source();
    bool keepNames = phi.isInjectiveOnMorphisms();
    GradedBuilder b(phi.source());
    std::vector<ObjId> objMap;
    std::map<std::pair<ObjId, ObjId>, ObjId> index;
    for (ObjId y = 0; y < v.objectCount(); ++y)
    {
        for (ObjId x : a->fiber(phi.onObject(y)))
        {
            std::string name = keepNames ? a->objectName(x) : v.objectName(y) + ":" + a->objectName(x);
            index[{y, x}] = b.addObject(name, y);
            objMap.push_back(x);
        }
    }
    b.freezeObjects();
    std::vector<HomId> homOf;   // new hom ↦ old hom
    std::size_t newHoms = 0;
    for (MorId m = 0; m < v.morphismCount(); ++m)
        for (ObjId x : a->fiber(phi.onObject(v.source(m))))
            for (ObjId x2 : a->fiber(phi.onObject(v.target(m))))
            {
                HomId old = a->homId(phi.onMorphism(m), x, x2);
                HomId h = b.homId(m, index.at({v.source(m), x}), index.at({v.target(m), x2}));
                if (homOf.size() <= h)
                    homOf.resize(h + 1);
                homOf[h] = old;
                ++newHoms;
                std::vector<std::string> names;
                for (std::size_t i = 0; i < a->dim(old); ++i)
                    names.push_back(keepNames ? a->basisName(old, i) : v.morphismName(m) + ":" + a->basisName(old, i));
                b.setBasis(h, names);
            }
    // Products and units are copied along the hom correspondence.
    std::vector<std::tuple<MorId, ObjId, ObjId> > triples(newHoms);
    for (MorId m = 0; m < v.morphismCount(); ++m)
        for (ObjId x : a->fiber(phi.onObject(v.source(m))))
            for (ObjId x2 : a->fiber(phi.onObject(v.target(m))))
            {
                ObjId p = index.at({v.source(m), x});
                ObjId q = index.at({v.target(m), x2});
                triples[b.homId(m, p, q)] = {m, p, q};
            }
    for (HomId f = 0; f < newHoms; ++f)
    {
        const auto& [mf, pf, qf] = triples[f];
        (void)pf;
        for (MorId mg : v.outgoing(v.target(mf)))
        {
            for (ObjId x3 : a->fiber(phi.onObject(v.target(mg))))
            {
                HomId g = b.homId(mg, qf, index.at({v.target(mg), x3}));
                const auto& table = a->product(homOf[g], homOf[f]);
                for (std::size_t i = 0; i < b.dim(g); ++i)
                    for (std::size_t j = 0; j < b.dim(f); ++j)
                        b.setProduct(g, i, f, j, table[i * b.dim(f) + j]);
            }
        }
    }
    for (const auto& [key, p] : index)
        b.setUnit(p, a->unit(key.second));
    GradedMap out;
    out.category = b.build();
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < newHoms; ++h)
        maps.push_back(QMatrix::identity(a->dim(homOf[h])));
    out.functor = GradedFunctor::make(out.category, a, phi, objMap, maps);
    return out;
}

GradedPullback pullbackGraded(const GradedFunctor& f1, const GradedFunctor& f2)
{
    if (f1.target().get() != f2.target().get())
        throw Error("TargetMismatch", "graded pullback of functors with different targets");
    CategoryPullback pb = pullbackCategory(f1.base(), f2.base());
    const GradedCat& b1 = *f1.source();
    const GradedCat& b2 = *f2.source();
    const FinCat& p = *pb.category;
    GradedBuilder builder(pb.category);
    std::vector<std::pair<ObjId, ObjId> > objs;
    std::vector<ObjId> objBase;
    std::map<std::pair<ObjId, ObjId>, ObjId> objIndex;
    for (ObjId y = 0; y < p.objectCount(); ++y)
    {
        auto [y1, y2] = pb.objectPairs[y];
        for (ObjId x1 : b1.fiber(y1))
            for (ObjId x2 : b2.fiber(y2))
                if (f1.onObject(x1) == f2.onObject(x2))
                {
                    objIndex[{x1, x2}] = builder.addObject("(" + b1.objectName(x1) + "," + b2.objectName(x2) + ")", y);
                    objs.emplace_back(x1, x2);
                    objBase.push_back(y);
                }
    }
    builder.freezeObjects();

    struct PbHom
    {
        MorId m;
        ObjId s;
        ObjId t;
        HomId h1;
        HomId h2;
        std::vector<QVector> kernel;   // columns in Q^{dim h1 + dim h2}
        std::unique_ptr<SpanCoordinates> coords;
    };
    std::map<HomId, PbHom> homs;
    std::vector<std::tuple<MorId, ObjId, ObjId> > triples;
    for (MorId m = 0; m < p.morphismCount(); ++m)
    {
        auto [m1, m2] = pb.morphismPairs[m];
        for (ObjId s = 0; s < objs.size(); ++s)
        {
            if (b1.over(objs[s].first) != b1.base()->source(m1) ||
                b2.over(objs[s].second) != b2.base()->source(m2))
                continue;
            for (ObjId t = 0; t < objs.size(); ++t)
            {
                if (b1.over(objs[t].first) != b1.base()->target(m1) || b2.over(objs[t].second) != b2.base()->target(m2))
                    continue;
                HomId h = builder.homId(m, s, t);
                PbHom ph;
                ph.m = m;
                ph.s = s;
                ph.t = t;
                ph.h1 = b1.homId(m1, objs[s].first, objs[t].first);
                ph.h2 = b2.homId(m2, objs[s].second, objs[t].second);
                QMatrix eq = QMatrix::hstack(f1.homMap(ph.h1), f2.homMap(ph.h2).scaled(Rational(-1)));
                ph.kernel = kernelBasis(eq);
                ph.coords = std::make_unique<SpanCoordinates>(b1.dim(ph.h1) + b2.dim(ph.h2), ph.kernel);
                std::vector<std::string> names;
                for (std::size_t i = 0; i < ph.kernel.size(); ++i)
                    names.push_back(p.morphismName(m) + "[" + std::to_string(s) + "," + std::to_string(t) + "]#" + std::to_string(i));
                builder.setBasis(h, names);
                homs.emplace(h, std::move(ph));
            }
        }
    }
    auto split = [&](const PbHom& ph, const QVector& v) {
        std::size_t d1 = b1.dim(ph.h1);
        QVector x(v.begin(), v.begin() + d1);
        QVector y(v.begin() + d1, v.end());
        return std::make_pair(toSparse(x), toSparse(y));
    };
    auto join = [&](const PbHom& ph, const SparseVector& x, const SparseVector& y) {
        QVector v = toDense(x, b1.dim(ph.h1));
        QVector w = toDense(y, b2.dim(ph.h2));
        v.insert(v.end(), w.begin(), w.end());
        return v;
    };
    for (const auto& [f, pf] : homs)
    {
        for (const auto& [g, pg] : homs)
        {
            if (pg.s != pf.t)
                continue;
            HomId gf = builder.homId(p.compose(pg.m, pf.m), pf.s, pg.t);
            const PbHom& pgf = homs.at(gf);
            for (std::size_t i = 0; i < pg.kernel.size(); ++i)
            {
                auto [g1, g2] = split(pg, pg.kernel[i]);
                for (std::size_t j = 0; j < pf.kernel.size(); ++j)
                {
                    auto [x1, x2] = split(pf, pf.kernel[j]);
                    QVector v = join(pgf, b1.compose(pg.h1, pf.h1, g1, x1), b2.compose(pg.h2, pf.h2, g2, x2));
                    auto c = pgf.coords->coordinates(v);
                    if (!c)
                        throw Error("InternalError", "pullback composite leaves the equalizer");
                    builder.setProduct(g, i, f, j, toSparse(*c));
                }
            }
        }
    }
    for (ObjId x = 0; x < objs.size(); ++x)
    {
        auto [x1, x2] = objs[x];
        HomId id = builder.homId(p.identity(objBase[x]), x, x);
        const PbHom& pid = homs.at(id);
        auto c = pid.coords->coordinates(join(pid, b1.unit(x1), b2.unit(x2)));
        builder.setUnit(x, toSparse(*c));
    }
    GradedPullback out;
    out.category = builder.build();
    std::vector<ObjId> o1, o2;
    for (auto [x1, x2] : objs)
    {
        o1.push_back(x1);
        o2.push_back(x2);
    }
    std::vector<QMatrix> maps1, maps2;
    for (const auto& [h, ph] : homs)
    {
        std::size_t d1 = b1.dim(ph.h1);
        std::size_t d2 = b2.dim(ph.h2);
        std::vector<std::size_t> top(d1), bottom(d2);
        for (std::size_t i = 0; i < d1; ++i)
            top[i] = i;
        for (std::size_t i = 0; i < d2; ++i)
            bottom[i] = d1 + i;
        QMatrix k = QMatrix::fromColumns(d1 + d2, ph.kernel);
        maps1.push_back(k.selectRows(top));
        maps2.push_back(k.selectRows(bottom));
    }
    out.first = GradedFunctor::make(out.category, f1.source(), pb.first, o1, maps1);
    out.second = GradedFunctor::make(out.category, f2.source(), pb.second, o2, maps2);
    return out;
}

GradedMap changeBasis(const GradedPtr& a, const std::vector<QMatrix>& change)
{
    GradedBuilder b(a->base());
    for (ObjId x = 0; x < a->objectCount(); ++x)
        b.addObject(a->objectName(x), a->over(x));
    b.freezeObjects();
    std::vector<QMatrix> inv;
    for (HomId h = 0; h < a->homCount(); ++h)
    {
        inv.push_back(inverse(change.at(h)));
        std::vector<std::string> names;
        for (std::size_t i = 0; i < a->dim(h); ++i)
            names.push_back(a->basisName(h, i) + "'");
        b.setBasis(h, names);
    }
    const FinCat& s = *a->sharp();
    for (HomId f = 0; f < a->homCount(); ++f)
    {
        for (HomId g : s.outgoing(s.target(f)))
        {
            HomId gf = s.compose(g, f);
            for (std::size_t i = 0; i < a->dim(g); ++i)
            {
                SparseVector x = toSparse(change[g].column(i));
                for (std::size_t j = 0; j < a->dim(f); ++j)
                {
                    SparseVector y = toSparse(change[f].column(j));
                    SparseVector z = a->compose(g, f, x, y);
                    b.setProduct(g, i, f, j, toSparse(inv[gf].apply(toDense(z, a->dim(gf)))));
                }
            }
        }
    }
    for (ObjId x = 0; x < a->objectCount(); ++x)
    {
        HomId id = s.identity(x);
        b.setUnit(x, toSparse(inv[id].apply(toDense(a->unit(x), a->dim(id)))));
    }
    GradedMap out;
    out.category = b.build();
    std::vector<ObjId> obj(a->objectCount());
    for (ObjId x = 0; x < obj.size(); ++x)
        obj[x] = x;
    out.functor = GradedFunctor::make(out.category, a, Functor::identity(a->base()), obj, change);
    return out;
}

/* ------------------------------------------------------------------ */

GradedPtr freeGraded(const CatPtr& u)
{
    GradedBuilder b(u);
    for (ObjId x = 0; x < u->objectCount(); ++x)
        b.addObject(u->objectName(x), x);
    b.freezeObjects();
    for (MorId m = 0; m < u->morphismCount(); ++m)
        b.setBasis(b.homId(m, u->source(m), u->target(m)), {u->morphismName(m)});
    for (MorId f = 0; f < u->morphismCount(); ++f)
        for (MorId g : u->outgoing(u->target(f)))
            b.setProduct(b.homId(g, u->source(g), u->target(g)), 0, b.homId(f, u->source(f), u->target(f)), 0,
                         {{0, Rational(1)}});
    for (ObjId x = 0; x < u->objectCount(); ++x)
        b.setUnit(x, {{0, Rational(1)}});
    return b.build();
}

GradedPtr algebraGraded(const std::string& object, const std::vector<std::string>& basis,
                        const std::vector<std::vector<QVector> >& table, const QVector& unit)
{
    CatPtr e = terminalCategory();
    GradedBuilder b(e);
    b.addObject(object, 0);
    b.freezeObjects();
    HomId h = b.homId(0, 0, 0);
    b.setBasis(h, basis);
    for (std::size_t i = 0; i < basis.size(); ++i)
        for (std::size_t j = 0; j < basis.size(); ++j)
            b.setProduct(h, i, h, j, toSparse(table[i][j]));
    b.setUnit(0, toSparse(unit));
    return b.build();
}

GradedPtr rationalsGraded()
{
    return algebraGraded("Q", {"1"}, {{{Rational(1)}}}, {Rational(1)});
}

GradedPtr dualNumbersGraded()
{
    QVector one{1, 0}, x{0, 1}, zero{0, 0};
    return algebraGraded("L", {"1", "x"}, {{one, x}, {x, zero}}, one);
}

}   // namespace mgc
