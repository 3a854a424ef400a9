/**
 * Finite categories, functors, nerves, covers and the categorical
 * constructions built on them.
 */

#include "mgc/fincat.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <queue>
#include <set>
#include <sstream>
#include <unordered_map>

namespace mgc {

namespace {

std::string joinViolations(const std::vector<Violation>& violations)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < violations.size(); ++i)
    {
        if (i > 0)
            out << "; ";
        out << violations[i].detail;
    }
    return out.str();
}

}   // namespace

/* ------------------------------------------------------------------ */

std::vector<Violation> FinCat::check(const RawCategory& raw)
{
    std::vector<Violation> out;
    std::map<std::string, ObjId> objectIndex;
    for (std::size_t i = 0; i < raw.objects.size(); ++i)
    {
        if (!objectIndex.emplace(raw.objects[i], i).second)
            out.push_back({"DuplicateName", "DuplicateName(object " + raw.objects[i] + ")"});
    }
    std::map<std::string, MorId> morphismIndex;
    std::vector<ObjId> src(raw.morphisms.size(), kNone);
    std::vector<ObjId> tgt(raw.morphisms.size(), kNone);
    for (std::size_t i = 0; i < raw.morphisms.size(); ++i)
    {
        const auto& m = raw.morphisms[i];
        if (!morphismIndex.emplace(m.name, i).second)
            out.push_back({"DuplicateName", "DuplicateName(morphism " + m.name + ")"});
        auto s = objectIndex.find(m.source);
        auto t = objectIndex.find(m.target);
        if (s == objectIndex.end() || t == objectIndex.end())
        {
            out.push_back({"UnknownName", "UnknownName(endpoint of " + m.name + ")"});
            continue;
        }
        src[i] = s->second;
        tgt[i] = t->second;
    }
    if (!out.empty())
        return out;

    std::size_t nm = raw.morphisms.size();
    std::vector<MorId> ident(raw.objects.size(), kNone);
    for (std::size_t x = 0; x < raw.objects.size(); ++x)
    {
        auto it = raw.identities.find(raw.objects[x]);
        if (it == raw.identities.end())
        {
            out.push_back({"BadIdentity", "BadIdentity(" + raw.objects[x] + ": no identity declared)"});
            continue;
        }
        auto m = morphismIndex.find(it->second);
        if (m == morphismIndex.end() || src[m->second] != x || tgt[m->second] != x)
        {
            out.push_back({"BadIdentity", "BadIdentity(" + raw.objects[x] + ": " + it->second + " is not an endomorphism)"});
            continue;
        }
        ident[x] = m->second;
    }
    for (const auto& [obj, mor] : raw.identities)
    {
        if (!objectIndex.count(obj))
            out.push_back({"UnknownName", "UnknownName(identity for object " + obj + ")"});
    }
    if (!out.empty())
        return out;

    std::vector<MorId> comp(nm * nm, kNone);
    for (const auto& entry : raw.compositions)
    {
        auto g = morphismIndex.find(entry[0]);
        auto f = morphismIndex.find(entry[1]);
        auto h = morphismIndex.find(entry[2]);
        if (g == morphismIndex.end() || f == morphismIndex.end() || h == morphismIndex.end())
        {
            out.push_back({"UnknownName", "UnknownName(composition " + entry[0] + "∘" + entry[1] + ")"});
            continue;
        }
        if (tgt[f->second] != src[g->second])
        {
            out.push_back({"NotComposable", "NotComposable(" + entry[0] + ", " + entry[1] + ")"});
            continue;
        }
        if (src[h->second] != src[f->second] || tgt[h->second] != tgt[g->second])
        {
            out.push_back({"BadEndpoints", "BadEndpoints(" + entry[0] + "∘" + entry[1] + " = " + entry[2] + ")"});
            continue;
        }
        MorId& slot = comp[g->second * nm + f->second];
        if (slot != kNone && slot != h->second)
        {
            out.push_back({"ConflictingComposite", "ConflictingComposite(" + entry[0] + ", " + entry[1] + ")"});
            continue;
        }
        slot = h->second;
    }
    if (!out.empty())
        return out;

    for (MorId g = 0; g < nm; ++g)
    {
        for (MorId f = 0; f < nm; ++f)
        {
            if (tgt[f] == src[g] && comp[g * nm + f] == kNone)
                out.push_back({"MissingComposite", "MissingComposite(" + raw.morphisms[g].name + ", " + raw.morphisms[f].name + ")"});
        }
    }
    if (!out.empty())
        return out;

    for (MorId f = 0; f < nm; ++f)
    {
        if (comp[ident[tgt[f]] * nm + f] != f || comp[f * nm + ident[src[f]]] != f)
            out.push_back({"BadIdentity", "BadIdentity(" + raw.morphisms[f].name + ")"});
    }
    for (MorId h = 0; h < nm; ++h)
    {
        for (MorId g = 0; g < nm; ++g)
        {
            if (tgt[g] != src[h])
                continue;
            MorId hg = comp[h * nm + g];
            for (MorId f = 0; f < nm; ++f)
            {
                if (tgt[f] != src[g])
                    continue;
                if (comp[hg * nm + f] != comp[h * nm + comp[g * nm + f]])
                {
                    out.push_back({"NonAssociative", "NonAssociative(" + raw.morphisms[h].name + ", " +
                                   raw.morphisms[g].name + ", " + raw.morphisms[f].name + ")"});
                }
            }
        }
    }
    return out;
}

CatPtr FinCat::fromRaw(const RawCategory& raw)
{
    std::vector<Violation> violations = check(raw);
    if (!violations.empty())
        throw Error(violations.front().code, joinViolations(violations));

    auto c = std::make_shared<FinCat>();
    c->objectNames_ = raw.objects;
    std::map<std::string, ObjId> objectIndex;
    for (std::size_t i = 0; i < raw.objects.size(); ++i)
        objectIndex[raw.objects[i]] = i;
    std::map<std::string, MorId> morphismIndex;
    for (std::size_t i = 0; i < raw.morphisms.size(); ++i)
    {
        c->morphismNames_.push_back(raw.morphisms[i].name);
        c->source_.push_back(objectIndex[raw.morphisms[i].source]);
        c->target_.push_back(objectIndex[raw.morphisms[i].target]);
        morphismIndex[raw.morphisms[i].name] = i;
    }
    for (const std::string& x : raw.objects)
        c->identity_.push_back(morphismIndex[raw.identities.at(x)]);
    std::size_t nm = raw.morphisms.size();
    c->comp_.assign(nm * nm, kNone);
    for (const auto& entry : raw.compositions)
        c->comp_[morphismIndex[entry[0]] * nm + morphismIndex[entry[1]]] = morphismIndex[entry[2]];
    c->index();
    return c;
}

void FinCat::index()
{
    std::size_t no = objectNames_.size();
    hom_.assign(no * no, {});
    outgoing_.assign(no, {});
    for (MorId u = 0; u < morphismNames_.size(); ++u)
    {
        hom_[source_[u] * no + target_[u]].push_back(u);
        outgoing_[source_[u]].push_back(u);
    }
}

std::optional<ObjId> FinCat::findObject(const std::string& name) const
{
    auto it = std::find(objectNames_.begin(), objectNames_.end(), name);
    if (it == objectNames_.end())
        return std::nullopt;
    return static_cast<ObjId>(it - objectNames_.begin());
}

std::optional<MorId> FinCat::findMorphism(const std::string& name) const
{
    auto it = std::find(morphismNames_.begin(), morphismNames_.end(), name);
    if (it == morphismNames_.end())
        return std::nullopt;
    return static_cast<MorId>(it - morphismNames_.begin());
}

MorId FinCat::compose(MorId g, MorId f) const
{
    MorId h = comp_[g * morphismCount() + f];
    if (h == kNone)
        throw Error("NotComposable", morphismNames_[g] + " ∘ " + morphismNames_[f]);
    return h;
}

RawCategory FinCat::toRaw() const
{
    RawCategory raw;
    raw.objects = objectNames_;
    for (MorId u = 0; u < morphismCount(); ++u)
        raw.morphisms.push_back({morphismNames_[u], objectNames_[source_[u]], objectNames_[target_[u]]});
    for (ObjId x = 0; x < objectCount(); ++x)
        raw.identities[objectNames_[x]] = morphismNames_[identity_[x]];
    for (MorId g = 0; g < morphismCount(); ++g)
    {
        for (MorId f = 0; f < morphismCount(); ++f)
        {
            MorId h = comp_[g * morphismCount() + f];
            if (h != kNone)
                raw.compositions.push_back({morphismNames_[g], morphismNames_[f], morphismNames_[h]});
        }
    }
    return raw;
}

bool FinCat::sameAs(const FinCat& other) const
{
    return objectNames_ == other.objectNames_ && morphismNames_ == other.morphismNames_ &&
           source_ == other.source_ && target_ == other.target_ && identity_ == other.identity_ &&
           comp_ == other.comp_;
}

/* ------------------------------------------------------------------ */

ObjId CategoryBuilder::addObject(const std::string& name, const std::string& identityName)
{
    ObjId x = raw_.objects.size();
    raw_.objects.push_back(name);
    std::string id = identityName.empty() ? "id_" + name : identityName;
    MorId u = raw_.morphisms.size();
    raw_.morphisms.push_back({id, name, name});
    raw_.identities[name] = id;
    objectIds_.push_back(name);
    identities_.push_back(u);
    source_.push_back(x);
    target_.push_back(x);
    return x;
}

MorId CategoryBuilder::addMorphism(const std::string& name, ObjId source, ObjId target)
{
    MorId u = raw_.morphisms.size();
    raw_.morphisms.push_back({name, raw_.objects.at(source), raw_.objects.at(target)});
    source_.push_back(source);
    target_.push_back(target);
    return u;
}

void CategoryBuilder::setComposite(MorId g, MorId f, MorId gf)
{
    comp_[{g, f}] = gf;
}

CatPtr CategoryBuilder::build() const
{
    RawCategory raw = raw_;
    std::map<std::pair<MorId, MorId>, MorId> comp = comp_;
    for (MorId f = 0; f < raw.morphisms.size(); ++f)
    {
        comp.emplace(std::make_pair(identities_[target_[f]], f), f);
        comp.emplace(std::make_pair(f, identities_[source_[f]]), f);
    }
    for (const auto& [gf, h] : comp)
        raw.compositions.push_back({raw.morphisms[gf.first].name, raw.morphisms[gf.second].name, raw.morphisms[h].name});
    return FinCat::fromRaw(raw);
}

CatPtr posetCategory(const std::vector<std::string>& objects,
                     const std::vector<std::pair<std::string, std::string> >& relations)
{
    std::size_t n = objects.size();
    std::map<std::string, std::size_t> index;
    for (std::size_t i = 0; i < n; ++i)
        index[objects[i]] = i;
    std::vector<std::vector<char> > le(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i)
        le[i][i] = 1;
    for (const auto& [a, b] : relations)
    {
        if (!index.count(a) || !index.count(b))
            throw Error("UnknownName", "relation " + a + " <= " + b);
        le[index[a]][index[b]] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (le[i][k] && le[k][j])
                    le[i][j] = 1;
    CategoryBuilder b;
    for (const std::string& x : objects)
        b.addObject(x);
    std::vector<std::vector<MorId> > mor(n, std::vector<MorId>(n, kNone));
    for (std::size_t i = 0; i < n; ++i)
        mor[i][i] = i;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            if (i != j && le[i][j])
                mor[i][j] = b.addMorphism(objects[i] + "<" + objects[j], i, j);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (le[i][j] && le[j][k])
                    b.setComposite(mor[j][k], mor[i][j], mor[i][k]);
    return b.build();
}

CatPtr chainCategory(std::size_t n)
{
    std::vector<std::string> objects;
    std::vector<std::pair<std::string, std::string> > relations;
    for (std::size_t i = 0; i <= n; ++i)
    {
        objects.push_back(std::to_string(i));
        if (i > 0)
            relations.emplace_back(std::to_string(i - 1), std::to_string(i));
    }
    return posetCategory(objects, relations);
}

CatPtr terminalCategory()
{
    CategoryBuilder b;
    b.addObject("*", "id");
    return b.build();
}

CatPtr monoidCategory(const std::vector<std::string>& elements,
                      const std::vector<std::vector<std::size_t> >& table)
{
    CategoryBuilder b;
    b.addObject("*", elements.at(0));
    for (std::size_t i = 1; i < elements.size(); ++i)
        b.addMorphism(elements[i], 0, 0);
    for (std::size_t i = 0; i < elements.size(); ++i)
        for (std::size_t j = 0; j < elements.size(); ++j)
            b.setComposite(i, j, table[i][j]);
    return b.build();
}

bool isPoset(const FinCat& c)
{
    for (ObjId a = 0; a < c.objectCount(); ++a)
    {
        for (ObjId b = 0; b < c.objectCount(); ++b)
        {
            if (c.hom(a, b).size() > 1)
                return false;
            if (a != b && !c.hom(a, b).empty() && !c.hom(b, a).empty())
                return false;
        }
    }
    return true;
}

bool isDelta(const FinCat& c)
{
    for (ObjId a = 0; a < c.objectCount(); ++a)
        for (ObjId b = a + 1; b < c.objectCount(); ++b)
            if (!c.hom(a, b).empty() && !c.hom(b, a).empty())
                return false;
    return true;
}

/* ------------------------------------------------------------------ */

Functor Functor::make(CatPtr source, CatPtr target, std::vector<ObjId> objectMap, std::vector<MorId> morphismMap)
{
    const FinCat& s = *source;
    const FinCat& t = *target;
    if (objectMap.size() != s.objectCount() || morphismMap.size() != s.morphismCount())
        throw Error("InvalidFunctor", "object or morphism map has the wrong size");
    for (ObjId x : objectMap)
        if (x >= t.objectCount())
            throw Error("InvalidFunctor", "object image out of range");
    for (MorId u = 0; u < s.morphismCount(); ++u)
    {
        MorId fu = morphismMap[u];
        if (fu >= t.morphismCount())
            throw Error("InvalidFunctor", "morphism image out of range");
        if (t.source(fu) != objectMap[s.source(u)] || t.target(fu) != objectMap[s.target(u)])
            throw Error("InvalidFunctor", "endpoints not preserved at " + s.morphismName(u));
    }
    for (ObjId x = 0; x < s.objectCount(); ++x)
        if (morphismMap[s.identity(x)] != t.identity(objectMap[x]))
            throw Error("InvalidFunctor", "identity not preserved at " + s.objectName(x));
    for (MorId f = 0; f < s.morphismCount(); ++f)
    {
        for (MorId g : s.outgoing(s.target(f)))
        {
            if (morphismMap[s.compose(g, f)] != t.compose(morphismMap[g], morphismMap[f]))
                throw Error("InvalidFunctor", "composition not preserved at " + s.morphismName(g) + " ∘ " + s.morphismName(f));
        }
    }
    Functor out;
    out.source_ = std::move(source);
    out.target_ = std::move(target);
    out.objects_ = std::move(objectMap);
    out.morphisms_ = std::move(morphismMap);
    return out;
}

Functor Functor::identity(CatPtr c)
{
    std::vector<ObjId> obj(c->objectCount());
    std::iota(obj.begin(), obj.end(), 0);
    std::vector<MorId> mor(c->morphismCount());
    std::iota(mor.begin(), mor.end(), 0);
    return make(c, c, obj, mor);
}

Functor Functor::compose(const Functor& g, const Functor& f)
{
    if (f.target_.get() != g.source_.get() && !f.target_->sameAs(*g.source_))
        throw Error("TargetMismatch", "functors do not compose");
    std::vector<ObjId> obj;
    for (ObjId x : f.objects_)
        obj.push_back(g.objects_[x]);
    std::vector<MorId> mor;
    for (MorId u : f.morphisms_)
        mor.push_back(g.morphisms_[u]);
    return make(f.source_, g.target_, obj, mor);
}

bool Functor::isInjectiveOnMorphisms() const
{
    std::set<MorId> seen(morphisms_.begin(), morphisms_.end());
    return seen.size() == morphisms_.size();
}

bool Functor::isBijective() const
{
    std::set<ObjId> objs(objects_.begin(), objects_.end());
    std::set<MorId> mors(morphisms_.begin(), morphisms_.end());
    return objs.size() == objects_.size() && objs.size() == target_->objectCount() &&
           mors.size() == morphisms_.size() && mors.size() == target_->morphismCount();
}

/* ------------------------------------------------------------------ */

bool Simplex::operator<(const Simplex& other) const
{
    if (mors != other.mors)
        return mors < other.mors;
    return start < other.start;
}

ObjId simplexVertex(const FinCat& c, const Simplex& s, std::size_t i)
{
    if (i == 0)
        return s.start;
    return c.target(s.mors[i - 1]);
}

MorId simplexComposite(const FinCat& c, const Simplex& s)
{
    MorId acc = c.identity(s.start);
    for (MorId u : s.mors)
        acc = c.compose(u, acc);
    return acc;
}

std::vector<Simplex> nerve(const FinCat& c, std::size_t n)
{
    std::vector<Simplex> out;
    if (n == 0)
    {
        for (ObjId x = 0; x < c.objectCount(); ++x)
            out.push_back({x, {}});
        return out;
    }
    std::vector<MorId> path;
    std::function<void()> extend = [&]() {
        if (path.size() == n)
        {
            out.push_back({c.source(path.front()), path});
            return;
        }
        for (MorId u : c.outgoing(c.target(path.back())))
        {
            path.push_back(u);
            extend();
            path.pop_back();
        }
    };
    for (MorId u = 0; u < c.morphismCount(); ++u)
    {
        path.assign(1, u);
        extend();
    }
    return out;
}

std::size_t nerveSize(const FinCat& c, std::size_t n)
{
    std::vector<std::size_t> ending(c.objectCount(), 1);
    for (std::size_t k = 0; k < n; ++k)
    {
        std::vector<std::size_t> next(c.objectCount(), 0);
        for (MorId u = 0; u < c.morphismCount(); ++u)
            next[c.target(u)] += ending[c.source(u)];
        ending = std::move(next);
    }
    return std::accumulate(ending.begin(), ending.end(), std::size_t(0));
}

Simplex mapSimplex(const Functor& f, const Simplex& s)
{
    Simplex out;
    out.start = f.onObject(s.start);
    for (MorId u : s.mors)
        out.mors.push_back(f.onMorphism(u));
    return out;
}

std::string simplexName(const FinCat& c, const Simplex& s)
{
    if (s.mors.empty())
        return c.objectName(s.start);
    std::string out = "(";
    for (std::size_t i = 0; i < s.mors.size(); ++i)
    {
        if (i > 0)
            out += ",";
        out += c.morphismName(s.mors[i]);
    }
    return out + ")";
}

/* ------------------------------------------------------------------ */

CategoryPullback pullbackCategory(const Functor& f1, const Functor& f2)
{
    if (f1.target().get() != f2.target().get() && !f1.target()->sameAs(*f2.target()))
        throw Error("TargetMismatch", "pullback of functors with different targets");
    const FinCat& a = *f1.source();
    const FinCat& b = *f2.source();
    CategoryPullback out;
    CategoryBuilder builder;
    std::map<std::pair<ObjId, ObjId>, ObjId> objIndex;
    std::map<std::pair<MorId, MorId>, MorId> morIndex;
    for (ObjId x = 0; x < a.objectCount(); ++x)
    {
        for (ObjId y = 0; y < b.objectCount(); ++y)
        {
            if (f1.onObject(x) != f2.onObject(y))
                continue;
            ObjId p = builder.addObject("(" + a.objectName(x) + "," + b.objectName(y) + ")",
                                        "(" + a.morphismName(a.identity(x)) + "," + b.morphismName(b.identity(y)) + ")");
            objIndex[{x, y}] = p;
            out.objectPairs.emplace_back(x, y);
        }
    }
    // Identity pairs were created with their objects; record them first.
    std::vector<std::pair<MorId, MorId> > morPairs(out.objectPairs.size());
    for (std::size_t p = 0; p < out.objectPairs.size(); ++p)
    {
        auto [x, y] = out.objectPairs[p];
        morPairs[p] = {a.identity(x), b.identity(y)};
        morIndex[morPairs[p]] = p;
    }
    for (MorId u = 0; u < a.morphismCount(); ++u)
    {
        for (MorId v = 0; v < b.morphismCount(); ++v)
        {
            if (f1.onMorphism(u) != f2.onMorphism(v))
                continue;
            if (a.isIdentity(u) && b.isIdentity(v))
                continue;
            MorId m = builder.addMorphism("(" + a.morphismName(u) + "," + b.morphismName(v) + ")",
                                          objIndex.at({a.source(u), b.source(v)}),
                                          objIndex.at({a.target(u), b.target(v)}));
            morIndex[{u, v}] = m;
            if (morPairs.size() <= m)
                morPairs.resize(m + 1);
            morPairs[m] = {u, v};
        }
    }
    for (MorId f = 0; f < morPairs.size(); ++f)
    {
        for (MorId g = 0; g < morPairs.size(); ++g)
        {
            auto [fu, fv] = morPairs[f];
            auto [gu, gv] = morPairs[g];
            if (a.target(fu) != a.source(gu) || b.target(fv) != b.source(gv))
                continue;
            builder.setComposite(g, f, morIndex.at({a.compose(gu, fu), b.compose(gv, fv)}));
        }
    }
    out.category = builder.build();
    out.morphismPairs = morPairs;
    std::vector<ObjId> o1, o2;
    for (auto [x, y] : out.objectPairs)
    {
        o1.push_back(x);
        o2.push_back(y);
    }
    std::vector<MorId> m1, m2;
    for (auto [u, v] : morPairs)
    {
        m1.push_back(u);
        m2.push_back(v);
    }
    out.first = Functor::make(out.category, f1.source(), o1, m1);
    out.second = Functor::make(out.category, f2.source(), o2, m2);
    return out;
}

/* ------------------------------------------------------------------ */

namespace {

/**
 * The hit-state automaton behind isNCover.
 */
class HitStates
{
    public:
        explicit HitStates(const std::vector<Functor>& family)
            : family_(family), target_(*family.front().target())
        {
            for (const Functor& f : family_)
            {
                std::vector<std::vector<MorId> > byImage(target_.morphismCount());
                for (MorId v = 0; v < f.source()->morphismCount(); ++v)
                    byImage[f.onMorphism(v)].push_back(v);
                preimages_.push_back(std::move(byImage));
            }
            for (ObjId x = 0; x < target_.objectCount(); ++x)
            {
                Key key;
                key.object = x;
                for (const Functor& f : family_)
                {
                    std::vector<ObjId> over;
                    for (ObjId y = 0; y < f.source()->objectCount(); ++y)
                        if (f.onObject(y) == x)
                            over.push_back(y);
                    key.sets.push_back(std::move(over));
                }
                initial_.push_back(intern(key));
            }
            // Close under transitions.
            for (std::size_t s = 0; s < keys_.size(); ++s)
            {
                const FinCat& u = target_;
                std::vector<std::size_t> row(u.morphismCount(), kNone);
                for (MorId m : u.outgoing(keys_[s].object))
                    row[m] = intern(step(keys_[s], m));
                transitions_.push_back(std::move(row));
            }
        }

        std::size_t stateCount() const { return keys_.size(); }
        std::size_t initial(ObjId x) const { return initial_[x]; }
        std::size_t next(std::size_t s, MorId m) const { return transitions_[s][m]; }
        ObjId objectOf(std::size_t s) const { return keys_[s].object; }

        bool hit(std::size_t s) const
        {
            for (const auto& set : keys_[s].sets)
                if (!set.empty())
                    return true;
            return false;
        }

    private:
        struct Key
        {
            ObjId object;
            std::vector<std::vector<ObjId> > sets;
            bool operator<(const Key& o) const { return std::tie(object, sets) < std::tie(o.object, o.sets); }
        };

        Key step(const Key& key, MorId m) const
        {
            Key out;
            out.object = target_.target(m);
            for (std::size_t i = 0; i < family_.size(); ++i)
            {
                const FinCat& v = *family_[i].source();
                std::set<ObjId> ends;
                for (MorId w : preimages_[i][m])
                    if (std::binary_search(key.sets[i].begin(), key.sets[i].end(), v.source(w)))
                        ends.insert(v.target(w));
                out.sets.emplace_back(ends.begin(), ends.end());
            }
            return out;
        }

        std::size_t intern(const Key& key)
        {
            auto it = index_.find(key);
            if (it != index_.end())
                return it->second;
            std::size_t id = keys_.size();
            keys_.push_back(key);
            index_.emplace(key, id);
            return id;
        }

        const std::vector<Functor>& family_;
        const FinCat& target_;
        std::vector<std::vector<std::vector<MorId> > > preimages_;
        std::vector<Key> keys_;
        std::map<Key, std::size_t> index_;
        std::vector<std::size_t> initial_;
        std::vector<std::vector<std::size_t> > transitions_;
};

}   // namespace

CoverVerdict isNCover(const std::vector<Functor>& family, std::optional<std::size_t> n, std::size_t depth)
{
    if (family.empty())
        throw Error("EmptyFamily", "a cover needs at least one functor");
    const FinCat& u = *family.front().target();
    for (const Functor& f : family)
        if (f.target().get() != family.front().target().get() && !f.target()->sameAs(u))
            throw Error("TargetMismatch", "cover members have different targets");

    CoverVerdict verdict;
    verdict.infinite = !n.has_value();
    std::size_t top = n.value_or(depth == 0 ? 2 * u.morphismCount() : depth);
    verdict.degreeChecked = top;

    HitStates states(family);
    std::vector<std::vector<char> > covered;   // covered[k][state]
    std::vector<char> level(states.stateCount());
    for (std::size_t s = 0; s < states.stateCount(); ++s)
        level[s] = states.hit(s);
    covered.push_back(level);
    auto allInitialCovered = [&](const std::vector<char>& c) {
        for (ObjId x = 0; x < u.objectCount(); ++x)
            if (!c[states.initial(x)])
                return false;
        return true;
    };
    std::optional<std::size_t> failing;
    if (!allInitialCovered(level))
        failing = 0;
    for (std::size_t k = 1; k <= top && !failing; ++k)
    {
        std::vector<char> nextLevel(states.stateCount());
        for (std::size_t s = 0; s < states.stateCount(); ++s)
        {
            bool ok = true;
            for (MorId m : u.outgoing(states.objectOf(s)))
                ok = ok && covered.back()[states.next(s, m)];
            nextLevel[s] = ok;
        }
        bool same = nextLevel == covered.back();
        covered.push_back(std::move(nextLevel));
        if (!allInitialCovered(covered.back()))
        {
            failing = k;
        }
        else if (same && !verdict.stabilized)
        {
            verdict.stabilized = true;
            verdict.stableDegree = k - 1;
            break;
        }
    }
    if (!failing)
        return verdict;

    verdict.isCover = false;
    std::size_t k = *failing;
    Simplex w;
    if (k == 0)
    {
        for (ObjId x = 0; x < u.objectCount(); ++x)
        {
            if (!covered[0][states.initial(x)])
            {
                w.start = x;
                break;
            }
        }
    }
    else
    {
        // Lexicographically first path whose state stays uncovered.
        std::size_t state = kNone;
        for (MorId m = 0; m < u.morphismCount() && state == kNone; ++m)
        {
            std::size_t s = states.next(states.initial(u.source(m)), m);
            if (!covered[k - 1][s])
            {
                w.start = u.source(m);
                w.mors.push_back(m);
                state = s;
            }
        }
        for (std::size_t remaining = k - 1; remaining > 0; --remaining)
        {
            for (MorId m : u.outgoing(states.objectOf(state)))
            {
                std::size_t s = states.next(state, m);
                if (!covered[remaining - 1][s])
                {
                    w.mors.push_back(m);
                    state = s;
                    break;
                }
            }
        }
    }
    verdict.witness = w;
    return verdict;
}

bool jointlySurjectiveAt(const std::vector<Functor>& family, std::size_t k)
{
    std::set<Simplex> hit;
    for (const Functor& f : family)
        for (const Simplex& s : nerve(*f.source(), k))
            hit.insert(mapSimplex(f, s));
    return hit.size() == nerve(*family.front().target(), k).size();
}

bool nerveInjective(const Functor& f, std::size_t n)
{
    std::set<Simplex> seen;
    for (const Simplex& s : nerve(*f.source(), n))
        if (!seen.insert(mapSimplex(f, s)).second)
            return false;
    return true;
}

bool nerveSurjective(const Functor& f, std::size_t n)
{
    return jointlySurjectiveAt({f}, n);
}

/* ------------------------------------------------------------------ */

void checkSubcategory(const Subcategory& s)
{
    const FinCat& c = *s.ambient;
    if (s.objects.size() != c.objectCount() || s.morphisms.size() != c.morphismCount())
        throw Error("NotASubcategory", "membership flags have the wrong size");
    for (ObjId x = 0; x < c.objectCount(); ++x)
        if (s.objects[x] && !s.morphisms[c.identity(x)])
            throw Error("NotASubcategory", "missing identity of " + c.objectName(x));
    for (MorId u = 0; u < c.morphismCount(); ++u)
    {
        if (!s.morphisms[u])
            continue;
        if (!s.objects[c.source(u)] || !s.objects[c.target(u)])
            throw Error("NotASubcategory", "endpoint of " + c.morphismName(u) + " missing");
        for (MorId g : c.outgoing(c.target(u)))
            if (s.morphisms[g] && !s.morphisms[c.compose(g, u)])
                throw Error("NotASubcategory", "not closed under " + c.morphismName(g) + " ∘ " + c.morphismName(u));
    }
}

Subcategory generatedSubcategory(const CatPtr& c, const std::vector<ObjId>& objects, const std::vector<MorId>& morphisms)
{
    Subcategory s{c, std::vector<char>(c->objectCount(), 0), std::vector<char>(c->morphismCount(), 0)};
    for (ObjId x : objects)
        s.objects[x] = 1;
    for (MorId u : morphisms)
    {
        s.morphisms[u] = 1;
        s.objects[c->source(u)] = 1;
        s.objects[c->target(u)] = 1;
    }
    for (ObjId x = 0; x < c->objectCount(); ++x)
        if (s.objects[x])
            s.morphisms[c->identity(x)] = 1;
    bool changed = true;
    while (changed)
    {
        changed = false;
        for (MorId f = 0; f < c->morphismCount(); ++f)
        {
            if (!s.morphisms[f])
                continue;
            for (MorId g : c->outgoing(c->target(f)))
            {
                if (s.morphisms[g] && !s.morphisms[c->compose(g, f)])
                {
                    s.morphisms[c->compose(g, f)] = 1;
                    changed = true;
                }
            }
        }
    }
    return s;
}

Subcategory fullSubcategory(const CatPtr& c, const std::vector<ObjId>& objects)
{
    Subcategory s{c, std::vector<char>(c->objectCount(), 0), std::vector<char>(c->morphismCount(), 0)};
    for (ObjId x : objects)
        s.objects[x] = 1;
    for (MorId u = 0; u < c->morphismCount(); ++u)
        s.morphisms[u] = s.objects[c->source(u)] && s.objects[c->target(u)];
    return s;
}

Subcategory intersectSubcategories(const Subcategory& a, const Subcategory& b)
{
    Subcategory s = a;
    for (std::size_t i = 0; i < s.objects.size(); ++i)
        s.objects[i] = a.objects[i] && b.objects[i];
    for (std::size_t i = 0; i < s.morphisms.size(); ++i)
        s.morphisms[i] = a.morphisms[i] && b.morphisms[i];
    return s;
}

Subcategory namedSubcategory(const CatPtr& c, const std::vector<std::string>& objects,
                             const std::vector<std::string>& morphisms)
{
    std::vector<ObjId> objs;
    for (const std::string& name : objects)
    {
        auto x = c->findObject(name);
        if (!x)
            throw Error("UnknownReference", "object " + name);
        objs.push_back(*x);
    }
    std::vector<MorId> mors;
    for (const std::string& name : morphisms)
    {
        auto u = c->findMorphism(name);
        if (!u)
            throw Error("UnknownReference", "morphism " + name);
        mors.push_back(*u);
    }
    Subcategory s = generatedSubcategory(c, objs, mors);
    return s;
}

SubcategoryEmbedding embedSubcategory(const Subcategory& s)
{
    checkSubcategory(s);
    const FinCat& c = *s.ambient;
    CategoryBuilder b;
    std::vector<ObjId> objMap;
    std::vector<ObjId> newObj(c.objectCount(), kNone);
    std::vector<MorId> morMap;
    std::vector<MorId> newMor(c.morphismCount(), kNone);
    for (ObjId x = 0; x < c.objectCount(); ++x)
    {
        if (!s.objects[x])
            continue;
        newObj[x] = b.addObject(c.objectName(x), c.morphismName(c.identity(x)));
        objMap.push_back(x);
    }
    morMap.resize(objMap.size());
    for (std::size_t i = 0; i < objMap.size(); ++i)
    {
        morMap[i] = c.identity(objMap[i]);
        newMor[c.identity(objMap[i])] = i;
    }
    for (MorId u = 0; u < c.morphismCount(); ++u)
    {
        if (!s.morphisms[u] || c.isIdentity(u))
            continue;
        newMor[u] = b.addMorphism(c.morphismName(u), newObj[c.source(u)], newObj[c.target(u)]);
        morMap.push_back(u);
    }
    for (MorId f : morMap)
        for (MorId g : c.outgoing(c.target(f)))
            if (s.morphisms[g])
                b.setComposite(newMor[g], newMor[f], newMor[c.compose(g, f)]);
    SubcategoryEmbedding out;
    out.category = b.build();
    out.inclusion = Functor::make(out.category, s.ambient, objMap, morMap);
    return out;
}

/* ------------------------------------------------------------------ */

bool isIdeal(const FinCat& c, const std::vector<char>& members)
{
    for (MorId z = 0; z < c.morphismCount(); ++z)
    {
        if (!members[z])
            continue;
        for (MorId u : c.outgoing(c.target(z)))
            if (!members[c.compose(u, z)])
                return false;
        for (MorId u = 0; u < c.morphismCount(); ++u)
            if (c.target(u) == c.source(z) && !members[c.compose(z, u)])
                return false;
    }
    return true;
}

bool isThinIdeal(const FinCat& c, const std::vector<char>& members)
{
    if (!isIdeal(c, members))
        return false;
    for (MorId z = 0; z < c.morphismCount(); ++z)
    {
        if (!members[z])
            continue;
        for (MorId u : c.outgoing(c.target(z)))
            if (members[u])
                return false;
    }
    return true;
}

bool decompositionCheck(const FinCat& c, const std::vector<char>& ideal, const Subcategory& v)
{
    if (!isIdeal(c, ideal))
        return false;
    try
    {
        checkSubcategory(v);
    }
    catch (const Error&)
    {
        return false;
    }
    for (MorId u = 0; u < c.morphismCount(); ++u)
        if ((ideal[u] != 0) == (v.morphisms[u] != 0))
            return false;
    return true;
}

std::vector<char> morphismSet(const FinCat& c, const std::vector<std::string>& names)
{
    std::vector<char> out(c.morphismCount(), 0);
    for (const std::string& name : names)
    {
        auto u = c.findMorphism(name);
        if (!u)
            throw Error("UnknownReference", "morphism " + name);
        out[*u] = 1;
    }
    return out;
}

/* ------------------------------------------------------------------ */

SetBifunctor SetBifunctor::make(CatPtr left, CatPtr right, std::vector<Element> elements,
                                std::vector<std::vector<std::size_t> > leftAction,
                                std::vector<std::vector<std::size_t> > rightAction)
{
    const FinCat& u = *left;
    const FinCat& v = *right;
    std::size_t n = elements.size();
    auto fail = [](const std::string& why) { throw Error("InvalidBifunctor", why); };
    if (leftAction.size() != u.morphismCount() || rightAction.size() != n)
        fail("action tables have the wrong size");
    for (const Element& e : elements)
        if (e.left >= u.objectCount() || e.right >= v.objectCount())
            fail("element " + e.name + " has an out-of-range index");
    for (MorId m = 0; m < u.morphismCount(); ++m)
    {
        if (leftAction[m].size() != n)
            fail("left action table has the wrong size");
        for (std::size_t s = 0; s < n; ++s)
        {
            std::size_t r = leftAction[m][s];
            bool composable = u.source(m) == elements[s].left;
            if (composable != (r != kNone))
                fail("left action defined off composable pairs at " + u.morphismName(m) + "·" + elements[s].name);
            if (composable && (r >= n || elements[r].left != u.target(m) || elements[r].right != elements[s].right))
                fail("left action lands in the wrong set at " + u.morphismName(m) + "·" + elements[s].name);
        }
    }
    for (std::size_t s = 0; s < n; ++s)
    {
        if (rightAction[s].size() != v.morphismCount())
            fail("right action table has the wrong size");
        for (MorId m = 0; m < v.morphismCount(); ++m)
        {
            std::size_t r = rightAction[s][m];
            bool composable = v.target(m) == elements[s].right;
            if (composable != (r != kNone))
                fail("right action defined off composable pairs at " + elements[s].name + "·" + v.morphismName(m));
            if (composable && (r >= n || elements[r].right != v.source(m) || elements[r].left != elements[s].left))
                fail("right action lands in the wrong set at " + elements[s].name + "·" + v.morphismName(m));
        }
    }
    for (std::size_t s = 0; s < n; ++s)
    {
        if (leftAction[u.identity(elements[s].left)][s] != s || rightAction[s][v.identity(elements[s].right)] != s)
            fail("identity does not act trivially on " + elements[s].name);
        for (MorId a : u.outgoing(elements[s].left))
        {
            std::size_t as = leftAction[a][s];
            for (MorId b : u.outgoing(u.target(a)))
                if (leftAction[b][as] != leftAction[u.compose(b, a)][s])
                    fail("left action not associative at " + elements[s].name);
            for (MorId w = 0; w < v.morphismCount(); ++w)
                if (v.target(w) == elements[s].right && rightAction[as][w] != leftAction[a][rightAction[s][w]])
                    fail("actions do not commute at " + elements[s].name);
        }
        for (MorId a = 0; a < v.morphismCount(); ++a)
        {
            if (v.target(a) != elements[s].right)
                continue;
            std::size_t sa = rightAction[s][a];
            for (MorId b = 0; b < v.morphismCount(); ++b)
                if (v.target(b) == v.source(a) && rightAction[sa][b] != rightAction[s][v.compose(a, b)])
                    fail("right action not associative at " + elements[s].name);
        }
    }
    SetBifunctor out;
    out.left_ = std::move(left);
    out.right_ = std::move(right);
    out.elements_ = std::move(elements);
    out.leftAction_ = std::move(leftAction);
    out.rightAction_ = std::move(rightAction);
    out.byPair_.assign(v.objectCount() * u.objectCount(), {});
    for (std::size_t s = 0; s < n; ++s)
        out.byPair_[out.elements_[s].right * u.objectCount() + out.elements_[s].left].push_back(s);
    return out;
}

const std::vector<std::size_t>& SetBifunctor::at(ObjId right, ObjId left) const
{
    return byPair_[right * left_->objectCount() + left];
}

SetBifunctor SetBifunctor::identity(const CatPtr& u)
{
    const FinCat& c = *u;
    std::vector<Element> elements;
    for (MorId m = 0; m < c.morphismCount(); ++m)
        elements.push_back({c.morphismName(m), c.source(m), c.target(m)});
    std::size_t n = c.morphismCount();
    std::vector<std::vector<std::size_t> > leftAct(n, std::vector<std::size_t>(n, kNone));
    std::vector<std::vector<std::size_t> > rightAct(n, std::vector<std::size_t>(n, kNone));
    for (MorId f = 0; f < n; ++f)
    {
        for (MorId g : c.outgoing(c.target(f)))
        {
            leftAct[g][f] = c.compose(g, f);
            rightAct[g][f] = c.compose(g, f);
        }
    }
    return make(u, u, elements, leftAct, rightAct);
}

SetBifunctor SetBifunctor::lowerStar(const Functor& phi)
{
    const FinCat& v = *phi.source();
    const FinCat& u = *phi.target();
    std::vector<Element> elements;
    std::map<std::pair<ObjId, MorId>, std::size_t> index;
    for (ObjId x = 0; x < v.objectCount(); ++x)
    {
        for (MorId m : u.outgoing(phi.onObject(x)))
        {
            index[{x, m}] = elements.size();
            elements.push_back({v.objectName(x) + "|" + u.morphismName(m), x, u.target(m)});
        }
    }
    std::size_t n = elements.size();
    std::vector<std::vector<std::size_t> > leftAct(u.morphismCount(), std::vector<std::size_t>(n, kNone));
    std::vector<std::vector<std::size_t> > rightAct(n, std::vector<std::size_t>(v.morphismCount(), kNone));
    for (const auto& [key, s] : index)
    {
        auto [x, m] = key;
        for (MorId a : u.outgoing(u.target(m)))
            leftAct[a][s] = index.at({x, u.compose(a, m)});
        for (MorId w = 0; w < v.morphismCount(); ++w)
            if (v.target(w) == x)
                rightAct[s][w] = index.at({v.source(w), u.compose(m, phi.onMorphism(w))});
    }
    return make(phi.target(), phi.source(), elements, leftAct, rightAct);
}

SetBifunctor SetBifunctor::upperStar(const Functor& phi)
{
    const FinCat& u = *phi.source();
    const FinCat& v = *phi.target();
    std::vector<Element> elements;
    std::map<std::pair<ObjId, MorId>, std::size_t> index;
    for (ObjId x = 0; x < u.objectCount(); ++x)
    {
        for (MorId m = 0; m < v.morphismCount(); ++m)
        {
            if (v.target(m) != phi.onObject(x))
                continue;
            index[{x, m}] = elements.size();
            elements.push_back({v.morphismName(m) + "|" + u.objectName(x), v.source(m), x});
        }
    }
    std::size_t n = elements.size();
    std::vector<std::vector<std::size_t> > leftAct(u.morphismCount(), std::vector<std::size_t>(n, kNone));
    std::vector<std::vector<std::size_t> > rightAct(n, std::vector<std::size_t>(v.morphismCount(), kNone));
    for (const auto& [key, s] : index)
    {
        auto [x, m] = key;
        for (MorId a : u.outgoing(x))
            leftAct[a][s] = index.at({u.target(a), v.compose(phi.onMorphism(a), m)});
        for (MorId w = 0; w < v.morphismCount(); ++w)
            if (v.target(w) == v.source(m))
                rightAct[s][w] = index.at({x, v.compose(m, w)});
    }
    return make(phi.source(), phi.target(), elements, leftAct, rightAct);
}

bool SetBifunctor::sameAs(const SetBifunctor& other) const
{
    if (!left_->sameAs(*other.left_) || !right_->sameAs(*other.right_) || elements_.size() != other.elements_.size())
        return false;
    for (std::size_t s = 0; s < elements_.size(); ++s)
    {
        const Element& a = elements_[s];
        const Element& b = other.elements_[s];
        if (a.name != b.name || a.left != b.left || a.right != b.right)
            return false;
    }
    return leftAction_ == other.leftAction_ && rightAction_ == other.rightAction_;
}

BifunctorComposite composeBifunctors(const SetBifunctor& s, const SetBifunctor& t)
{
    if (!s.right()->sameAs(*t.left()))
        throw Error("MiddleMismatch", "bifunctors do not compose");
    const FinCat& v = *s.right();
    std::vector<std::pair<std::size_t, std::size_t> > pairs;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> pairIndex;
    for (std::size_t a = 0; a < s.size(); ++a)
    {
        for (std::size_t b = 0; b < t.size(); ++b)
        {
            if (s.element(a).right != t.element(b).left)
                continue;
            pairIndex[{a, b}] = pairs.size();
            pairs.emplace_back(a, b);
        }
    }
    std::vector<std::size_t> parent(pairs.size());
    std::iota(parent.begin(), parent.end(), 0);
    std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
        while (parent[x] != x)
        {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    auto unite = [&](std::size_t x, std::size_t y) {
        x = find(x);
        y = find(y);
        if (x != y)
            parent[std::max(x, y)] = std::min(x, y);   // least pair index stays the root
    };
    for (std::size_t a = 0; a < s.size(); ++a)
    {
        for (MorId w = 0; w < v.morphismCount(); ++w)
        {
            if (v.target(w) != s.element(a).right)
                continue;
            std::size_t aw = s.actRight(a, w);
            for (std::size_t b = 0; b < t.size(); ++b)
            {
                if (t.element(b).left != v.source(w))
                    continue;
                unite(pairIndex.at({aw, b}), pairIndex.at({a, t.actLeft(w, b)}));
            }
        }
    }
    BifunctorComposite out;
    std::map<std::size_t, std::size_t> rootClass;
    std::vector<SetBifunctor::Element> elements;
    for (std::size_t p = 0; p < pairs.size(); ++p)
    {
        std::size_t r = find(p);
        if (!rootClass.count(r))
        {
            rootClass[r] = elements.size();
            auto [a, b] = pairs[r];
            elements.push_back({"[" + s.element(a).name + ";" + t.element(b).name + "]", t.element(b).right, s.element(a).left});
            out.representative.push_back(pairs[r]);
        }
        out.classOf[pairs[p]] = rootClass[r];
    }
    const FinCat& u = *s.left();
    const FinCat& w = *t.right();
    std::size_t n = elements.size();
    std::vector<std::vector<std::size_t> > leftAct(u.morphismCount(), std::vector<std::size_t>(n, kNone));
    std::vector<std::vector<std::size_t> > rightAct(n, std::vector<std::size_t>(w.morphismCount(), kNone));
    for (std::size_t c = 0; c < n; ++c)
    {
        auto [a, b] = out.representative[c];
        for (MorId m : u.outgoing(s.element(a).left))
            leftAct[m][c] = out.classOf.at({s.actLeft(m, a), b});
        for (MorId m = 0; m < w.morphismCount(); ++m)
            if (w.target(m) == t.element(b).right)
                rightAct[c][m] = out.classOf.at({a, t.actRight(b, m)});
    }
    out.composite = SetBifunctor::make(s.left(), t.right(), elements, leftAct, rightAct);
    return out;
}

/* ------------------------------------------------------------------ */

ArrowBase arrowCategoryBase(const SetBifunctor& s)
{
    const FinCat& v = *s.right();
    const FinCat& u = *s.left();
    std::set<std::string> names;
    bool clash = false;
    auto note = [&](const std::string& n) { clash = clash || !names.insert(n).second; };
    for (ObjId x = 0; x < v.objectCount(); ++x)
        note("o:" + v.objectName(x));
    for (ObjId x = 0; x < u.objectCount(); ++x)
        note("o:" + u.objectName(x));
    for (MorId m = 0; m < v.morphismCount(); ++m)
        note("m:" + v.morphismName(m));
    for (MorId m = 0; m < u.morphismCount(); ++m)
        note("m:" + u.morphismName(m));
    for (std::size_t e = 0; e < s.size(); ++e)
        note("m:" + s.element(e).name);
    std::string pv = clash ? "V." : "";
    std::string pu = clash ? "U." : "";
    std::string ps = clash ? "S." : "";

    CategoryBuilder b;
    std::vector<ObjId> vObj, uObj;
    for (ObjId x = 0; x < v.objectCount(); ++x)
        vObj.push_back(b.addObject(pv + v.objectName(x), pv + v.morphismName(v.identity(x))));
    for (ObjId x = 0; x < u.objectCount(); ++x)
        uObj.push_back(b.addObject(pu + u.objectName(x), pu + u.morphismName(u.identity(x))));
    std::vector<MorId> vMor(v.morphismCount()), uMor(u.morphismCount());
    for (ObjId x = 0; x < v.objectCount(); ++x)
        vMor[v.identity(x)] = vObj[x];
    for (ObjId x = 0; x < u.objectCount(); ++x)
        uMor[u.identity(x)] = uObj[x];
    for (MorId m = 0; m < v.morphismCount(); ++m)
        if (!v.isIdentity(m))
            vMor[m] = b.addMorphism(pv + v.morphismName(m), vObj[v.source(m)], vObj[v.target(m)]);
    for (MorId m = 0; m < u.morphismCount(); ++m)
        if (!u.isIdentity(m))
            uMor[m] = b.addMorphism(pu + u.morphismName(m), uObj[u.source(m)], uObj[u.target(m)]);
    std::vector<MorId> cross(s.size());
    for (std::size_t e = 0; e < s.size(); ++e)
        cross[e] = b.addMorphism(ps + s.element(e).name, vObj[s.element(e).right], uObj[s.element(e).left]);
    for (MorId f = 0; f < v.morphismCount(); ++f)
        for (MorId g : v.outgoing(v.target(f)))
            b.setComposite(vMor[g], vMor[f], vMor[v.compose(g, f)]);
    for (MorId f = 0; f < u.morphismCount(); ++f)
        for (MorId g : u.outgoing(u.target(f)))
            b.setComposite(uMor[g], uMor[f], uMor[u.compose(g, f)]);
    for (std::size_t e = 0; e < s.size(); ++e)
    {
        for (MorId g : u.outgoing(s.element(e).left))
            b.setComposite(uMor[g], cross[e], cross[s.actLeft(g, e)]);
        for (MorId f = 0; f < v.morphismCount(); ++f)
            if (v.target(f) == s.element(e).right)
                b.setComposite(cross[e], vMor[f], cross[s.actRight(e, f)]);
    }
    ArrowBase out;
    out.category = b.build();
    out.fromRight = Functor::make(s.right(), out.category, vObj, vMor);
    out.fromLeft = Functor::make(s.left(), out.category, uObj, uMor);
    out.crossMorphism = cross;
    return out;
}

ArrowRecognition recognizeArrow(const CatPtr& wPtr, const std::vector<char>& ideal, bool requireThin)
{
    const FinCat& w = *wPtr;
    ArrowRecognition out;
    auto failWith = [&](const std::string& code, const std::string& detail) {
        out.ok = false;
        out.failure = code;
        out.detail = detail;
        return out;
    };
    if (!isIdeal(w, ideal))
        return failWith("NotIdeal", "the morphism set is not closed under composition");
    if (requireThin && !isThinIdeal(w, ideal))
        return failWith("NotThin", "the ideal contains consecutive morphisms");

    // Reachability along the morphism graph.
    std::size_t no = w.objectCount();
    auto reach = [&](ObjId from, bool forward) {
        std::vector<char> seen(no, 0);
        std::queue<ObjId> q;
        seen[from] = 1;
        q.push(from);
        while (!q.empty())
        {
            ObjId x = q.front();
            q.pop();
            for (MorId m = 0; m < w.morphismCount(); ++m)
            {
                ObjId a = forward ? w.source(m) : w.target(m);
                ObjId b = forward ? w.target(m) : w.source(m);
                if (a == x && !seen[b])
                {
                    seen[b] = 1;
                    q.push(b);
                }
            }
        }
        return seen;
    };
    std::vector<char> below(no, 0), above(no, 0);
    for (MorId z = 0; z < w.morphismCount(); ++z)
    {
        if (!ideal[z])
            continue;
        std::vector<char> to = reach(w.source(z), false);
        std::vector<char> from = reach(w.target(z), true);
        for (ObjId x = 0; x < no; ++x)
        {
            below[x] = below[x] || to[x];
            above[x] = above[x] || from[x];
        }
    }
    for (ObjId x = 0; x < no; ++x)
    {
        if (below[x] && above[x])
            return failWith("NotThin", "object " + w.objectName(x) + " lies both above and below the ideal");
        if (!below[x] && !above[x])
            return failWith("ObjectsNotCovered", "object " + w.objectName(x) + " is neither above nor below the ideal");
    }
    for (MorId m = 0; m < w.morphismCount(); ++m)
    {
        if (below[w.source(m)] && above[w.target(m)] && !ideal[m])
            return failWith("ExtraCrossMorphisms", "morphism " + w.morphismName(m) + " crosses outside the ideal");
        if (above[w.source(m)] && below[w.target(m)])
            return failWith("ExtraCrossMorphisms", "morphism " + w.morphismName(m) + " goes from above to below");
    }

    std::vector<ObjId> belowList, aboveList;
    for (ObjId x = 0; x < no; ++x)
        (below[x] ? belowList : aboveList).push_back(x);
    out.below = fullSubcategory(wPtr, belowList);
    out.above = fullSubcategory(wPtr, aboveList);
    SubcategoryEmbedding vEmb = embedSubcategory(out.below);
    SubcategoryEmbedding uEmb = embedSubcategory(out.above);
    std::vector<std::size_t> vLocalObj(no, kNone), uLocalObj(no, kNone);
    for (ObjId x = 0; x < vEmb.category->objectCount(); ++x)
        vLocalObj[vEmb.inclusion.onObject(x)] = x;
    for (ObjId x = 0; x < uEmb.category->objectCount(); ++x)
        uLocalObj[uEmb.inclusion.onObject(x)] = x;
    std::vector<MorId> vLocalMor(w.morphismCount(), kNone), uLocalMor(w.morphismCount(), kNone);
    for (MorId m = 0; m < vEmb.category->morphismCount(); ++m)
        vLocalMor[vEmb.inclusion.onMorphism(m)] = m;
    for (MorId m = 0; m < uEmb.category->morphismCount(); ++m)
        uLocalMor[uEmb.inclusion.onMorphism(m)] = m;

    std::vector<SetBifunctor::Element> elements;
    std::vector<std::size_t> elementOf(w.morphismCount(), kNone);
    for (MorId z = 0; z < w.morphismCount(); ++z)
    {
        if (!ideal[z])
            continue;
        elementOf[z] = elements.size();
        out.crossMorphisms.push_back(z);
        elements.push_back({w.morphismName(z), vLocalObj[w.source(z)], uLocalObj[w.target(z)]});
    }
    std::size_t n = elements.size();
    const FinCat& uc = *uEmb.category;
    const FinCat& vc = *vEmb.category;
    std::vector<std::vector<std::size_t> > leftAct(uc.morphismCount(), std::vector<std::size_t>(n, kNone));
    std::vector<std::vector<std::size_t> > rightAct(n, std::vector<std::size_t>(vc.morphismCount(), kNone));
    for (std::size_t e = 0; e < n; ++e)
    {
        MorId z = out.crossMorphisms[e];
        for (MorId m = 0; m < uc.morphismCount(); ++m)
            if (uc.source(m) == elements[e].left)
                leftAct[m][e] = elementOf[w.compose(uEmb.inclusion.onMorphism(m), z)];
        for (MorId m = 0; m < vc.morphismCount(); ++m)
            if (vc.target(m) == elements[e].right)
                rightAct[e][m] = elementOf[w.compose(z, vEmb.inclusion.onMorphism(m))];
    }
    out.bifunctor = SetBifunctor::make(uEmb.category, vEmb.category, elements, leftAct, rightAct);
    out.base = arrowCategoryBase(out.bifunctor);

    const FinCat& base = *out.base.category;
    std::vector<ObjId> objMap(base.objectCount(), kNone);
    std::vector<MorId> morMap(base.morphismCount(), kNone);
    for (ObjId x = 0; x < vc.objectCount(); ++x)
        objMap[out.base.fromRight.onObject(x)] = vEmb.inclusion.onObject(x);
    for (ObjId x = 0; x < uc.objectCount(); ++x)
        objMap[out.base.fromLeft.onObject(x)] = uEmb.inclusion.onObject(x);
    for (MorId m = 0; m < vc.morphismCount(); ++m)
        morMap[out.base.fromRight.onMorphism(m)] = vEmb.inclusion.onMorphism(m);
    for (MorId m = 0; m < uc.morphismCount(); ++m)
        morMap[out.base.fromLeft.onMorphism(m)] = uEmb.inclusion.onMorphism(m);
    for (std::size_t e = 0; e < n; ++e)
        morMap[out.base.crossMorphism[e]] = out.crossMorphisms[e];
    out.comparison = Functor::make(out.base.category, wPtr, objMap, morMap);
    if (!out.comparison.isBijective())
        return failWith("ExtraCrossMorphisms", "comparison functor is not bijective");
    out.ok = true;
    return out;
}

/* ------------------------------------------------------------------ */

ChainCover chainCover(const CatPtr& pPtr)
{
    const FinCat& p = *pPtr;
    if (!isPoset(p))
        throw Error("NotPoset", "chain covers need a poset");
    std::size_t n = p.objectCount();
    auto less = [&](ObjId a, ObjId b) { return a != b && !p.hom(a, b).empty(); };
    std::vector<std::vector<ObjId> > covers(n);
    for (ObjId a = 0; a < n; ++a)
    {
        for (ObjId b = 0; b < n; ++b)
        {
            if (!less(a, b))
                continue;
            bool between = false;
            for (ObjId c = 0; c < n && !between; ++c)
                between = less(a, c) && less(c, b);
            if (!between)
                covers[a].push_back(b);
        }
    }
    ChainCover out;
    std::vector<ObjId> chain;
    std::function<void(ObjId)> walk = [&](ObjId x) {
        chain.push_back(x);
        if (covers[x].empty())
            out.chains.push_back(chain);
        for (ObjId y : covers[x])
            walk(y);
        chain.pop_back();
    };
    for (ObjId x = 0; x < n; ++x)
    {
        bool minimal = true;
        for (ObjId y = 0; y < n; ++y)
            minimal = minimal && !less(y, x);
        if (minimal)
            walk(x);
    }
    for (const auto& c : out.chains)
    {
        std::vector<MorId> steps;
        for (std::size_t i = 0; i + 1 < c.size(); ++i)
            steps.push_back(p.hom(c[i], c[i + 1]).front());
        out.pieces.push_back(generatedSubcategory(pPtr, c, steps));
    }
    for (std::size_t i = 0; i < out.pieces.size(); ++i)
        for (std::size_t j = i + 1; j < out.pieces.size(); ++j)
            out.intersections[{i, j}] = intersectSubcategories(out.pieces[i], out.pieces[j]);
    return out;
}

Slice sliceCategory(const CatPtr& cPtr, ObjId x)
{
    const FinCat& c = *cPtr;
    Slice out;
    CategoryBuilder b;
    std::vector<MorId> objs;
    std::map<MorId, ObjId> objIndex;
    for (MorId m = 0; m < c.morphismCount(); ++m)
    {
        if (c.target(m) != x)
            continue;
        objIndex[m] = b.addObject(c.morphismName(m), "id[" + c.morphismName(m) + "]");
        objs.push_back(m);
        if (m == c.identity(x))
            out.terminal = objIndex[m];
    }
    struct SliceMor
    {
        MorId d;
        MorId from;
        MorId to;
    };
    std::vector<SliceMor> mors;
    for (MorId m : objs)
        mors.push_back({c.identity(c.source(m)), m, m});
    std::map<std::tuple<MorId, MorId, MorId>, MorId> morIndex;
    for (std::size_t i = 0; i < objs.size(); ++i)
        morIndex[{mors[i].d, objs[i], objs[i]}] = i;
    for (MorId from : objs)
    {
        for (MorId to : objs)
        {
            for (MorId d : c.hom(c.source(from), c.source(to)))
            {
                if (c.compose(to, d) != from || (from == to && d == c.identity(c.source(from))))
                    continue;
                MorId id = b.addMorphism(c.morphismName(d) + "[" + c.morphismName(from) + "," + c.morphismName(to) + "]",
                                         objIndex[from], objIndex[to]);
                morIndex[{d, from, to}] = id;
                mors.push_back({d, from, to});
            }
        }
    }
    for (MorId f = 0; f < mors.size(); ++f)
        for (MorId g = 0; g < mors.size(); ++g)
            if (mors[f].to == mors[g].from)
                b.setComposite(g, f, morIndex.at({c.compose(mors[g].d, mors[f].d), mors[f].from, mors[g].to}));
    out.category = b.build();
    out.objectMorphism = objs;
    std::vector<ObjId> objMap;
    for (MorId m : objs)
        objMap.push_back(c.source(m));
    std::vector<MorId> morMap;
    for (const SliceMor& m : mors)
        morMap.push_back(m.d);
    out.forget = Functor::make(out.category, cPtr, objMap, morMap);
    return out;
}

std::optional<ProductCone> findProduct(const FinCat& c, ObjId a, ObjId b)
{
    for (ObjId p = 0; p < c.objectCount(); ++p)
    {
        for (MorId pa : c.hom(p, a))
        {
            for (MorId pb : c.hom(p, b))
            {
                bool universal = true;
                for (ObjId x = 0; x < c.objectCount() && universal; ++x)
                {
                    for (MorId f : c.hom(x, a))
                    {
                        for (MorId g : c.hom(x, b))
                        {
                            std::size_t count = 0;
                            for (MorId h : c.hom(x, p))
                                if (c.compose(pa, h) == f && c.compose(pb, h) == g)
                                    ++count;
                            if (count != 1)
                                universal = false;
                        }
                    }
                }
                if (universal)
                    return ProductCone{p, pa, pb};
            }
        }
    }
    return std::nullopt;
}

}   // namespace mgc
