/**
 * Pseudofunctors, Grothendieck constructions, base change, C*, chain
 * covers, arrow decompositions and the comparison check.
 */

#include "mgc/groth.hpp"

#include <algorithm>
#include <set>

namespace mgc {

namespace {

using Accum = std::map<std::size_t, Rational>;

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

bool sameGraded(const GradedPtr& a, const GradedPtr& b)
{
    return a == b || !structuralDifference(*a, *b);
}

std::string uniqueName(std::set<std::string>& used, const std::string& name)
{
    std::string candidate = name;
    for (std::size_t k = 2; !used.insert(candidate).second; ++k)
        candidate = name + "'" + std::to_string(k);
    return candidate;
}

/**
 * Bilinear product of x ∈ M_{c′} space p2 and y ∈ M_c space p1.
 */
std::pair<SpaceId, SparseVector> multiply(const PseudoFunctor& p, MorId outer, SpaceId p2, const SparseVector& x,
                                          MorId inner, SpaceId p1, const SparseVector& y)
{
    auto [target, constants] = composeSpaces(p, outer, p2, inner, p1);
    std::size_t width = p.edges[inner].dim(p1);
    Accum acc;
    for (const auto& [i, u] : x)
        for (const auto& [j, w] : y)
            for (const auto& [k, c] : (*constants)[i * width + j])
                acc[k] += u * w * c;
    return {target, fromAccum(acc)};
}

std::string spaceLabel(const Bimodule& m, SpaceId p, std::size_t i)
{
    const Bimodule::Space& sp = m.space(p);
    return m.basisName(p, i) + " in " + m.carrier().element(sp.element).name + "(" +
           m.right()->objectName(sp.right) + ", " + m.left()->objectName(sp.left) + ")";
}

std::string pairLabel(const FinCat& c, MorId outer, MorId inner)
{
    return "(" + c.morphismName(outer) + ", " + c.morphismName(inner) + ")";
}

[[noreturn]] void coherenceFailed(const std::string& where, const std::string& what)
{
    throw Error("CoherenceFailed", where + ": " + what);
}

void checkPair(const PseudoFunctor& p, MorId c2, MorId c1)
{
    const FinCat& base = *p.base;
    std::string where = pairLabel(base, c2, c1);
    auto it = p.coherence.find({c2, c1});
    if (it == p.coherence.end())
        coherenceFailed(where, "missing coherence data");
    const Coherence& coh = it->second;
    MorId c21 = base.compose(c2, c1);
    const SetBifunctor& s2 = p.edges[c2].carrier();
    const SetBifunctor& s1 = p.edges[c1].carrier();
    const SetBifunctor& s = p.edges[c21].carrier();
    const FinCat& mid = *p.fibers[base.target(c1)]->base();
    const FinCat& top = *p.fibers[base.target(c2)]->base();
    const FinCat& bottom = *p.fibers[base.source(c1)]->base();

    auto element = [&](std::size_t a, std::size_t b) {
        auto e = coh.elements.find({a, b});
        if (e == coh.elements.end() || e->second >= s.size())
            coherenceFailed(where, "no element for (" + s2.element(a).name + ", " + s1.element(b).name + ")");
        return e->second;
    };
    for (std::size_t a = 0; a < s2.size(); ++a)
    {
        for (std::size_t b = 0; b < s1.size(); ++b)
        {
            if (s2.element(a).right != s1.element(b).left)
                continue;
            std::size_t r = element(a, b);
            std::string label = "(" + s2.element(a).name + ", " + s1.element(b).name + ")";
            if (s.element(r).right != s1.element(b).right || s.element(r).left != s2.element(a).left)
                coherenceFailed(where, "element " + label + " lands between the wrong objects");
            for (MorId u : top.outgoing(s2.element(a).left))
                if (element(s2.actLeft(u, a), b) != s.actLeft(u, r))
                    coherenceFailed(where, "left action of " + top.morphismName(u) + " on " + label);
            for (MorId w = 0; w < bottom.morphismCount(); ++w)
                if (bottom.target(w) == s1.element(b).right && element(a, s1.actRight(b, w)) != s.actRight(r, w))
                    coherenceFailed(where, "right action of " + bottom.morphismName(w) + " on " + label);
            for (MorId v : mid.outgoing(s1.element(b).left))
            {
                for (std::size_t a2 = 0; a2 < s2.size(); ++a2)
                {
                    if (s2.element(a2).right != mid.target(v))
                        continue;
                    if (element(s2.actRight(a2, v), b) != element(a2, s1.actLeft(v, b)))
                        coherenceFailed(where, "not balanced at " + mid.morphismName(v));
                }
            }
        }
    }
    BifunctorComposite comp = composeBifunctors(s2, s1);
    std::vector<std::size_t> classTarget(comp.composite.size(), kNone);
    for (const auto& [ab, cls] : comp.classOf)
        classTarget[cls] = element(ab.first, ab.second);
    std::vector<char> hit(s.size(), 0);
    for (std::size_t r : classTarget)
    {
        if (hit[r])
            coherenceFailed(where, "element map is not injective at " + s.element(r).name);
        hit[r] = 1;
    }
    for (std::size_t r = 0; r < s.size(); ++r)
        if (!hit[r])
            coherenceFailed(where, "element map misses " + s.element(r).name);

    const Bimodule& m2 = p.edges[c2];
    const Bimodule& m1 = p.edges[c1];
    const Bimodule& m = p.edges[c21];
    for (const auto& [key, constants] : coh.products)
    {
        auto [q2, q1] = key;
        if (q2 >= m2.spaceCount() || q1 >= m1.spaceCount() || m2.space(q2).right != m1.space(q1).left)
            coherenceFailed(where, "products given on incompatible spaces");
        if (constants.size() != m2.dim(q2) * m1.dim(q1))
            coherenceFailed(where, "wrong number of products on " + std::to_string(q2) + ", " + std::to_string(q1));
    }
    const GradedCat& aTop = *p.fibers[base.target(c2)];
    const GradedCat& aMid = *p.fibers[base.target(c1)];
    const GradedCat& aBottom = *p.fibers[base.source(c1)];
    for (SpaceId q2 = 0; q2 < m2.spaceCount(); ++q2)
    {
        for (SpaceId q1 = 0; q1 < m1.spaceCount(); ++q1)
        {
            if (m2.space(q2).right != m1.space(q1).left)
                continue;
            if (m2.dim(q2) * m1.dim(q1) > 0 && !coh.products.count({q2, q1}))
                coherenceFailed(where, "missing products on " + spaceLabel(m2, q2, 0) + " ⊗ " + spaceLabel(m1, q1, 0));
            if (m2.dim(q2) * m1.dim(q1) == 0)
                continue;
            SpaceId t = composeSpaces(p, c2, q2, c1, q1).first;
            for (const SparseVector& v : coh.products.at({q2, q1}))
                for (const auto& [k, x] : v)
                    if (k >= m.dim(t))
                        coherenceFailed(where, "product index out of range");
            for (std::size_t i = 0; i < m2.dim(q2); ++i)
            {
                for (std::size_t j = 0; j < m1.dim(q1); ++j)
                {
                    std::string label = spaceLabel(m2, q2, i) + " ⊗ " + spaceLabel(m1, q1, j);
                    SparseVector xv = unitVector(i);
                    SparseVector yv = unitVector(j);
                    auto prod = multiply(p, c2, q2, xv, c1, q1, yv);
                    for (HomId h = 0; h < aTop.homCount(); ++h)
                    {
                        if (aTop.homSource(h) != m2.space(q2).left)
                            continue;
                        for (std::size_t k = 0; k < aTop.dim(h); ++k)
                        {
                            SparseVector av = unitVector(k);
                            SparseVector lhs = m.actLeft(h, prod.first, av, prod.second);
                            SparseVector am = m2.actLeft(h, q2, av, xv);
                            auto rhs = multiply(p, c2, m2.leftTarget(h, q2), am, c1, q1, yv);
                            if (lhs != rhs.second)
                                coherenceFailed(where, "not left linear at " + aTop.basisName(h, k) + " · " + label);
                        }
                    }
                    for (HomId h = 0; h < aBottom.homCount(); ++h)
                    {
                        if (aBottom.homTarget(h) != m1.space(q1).right)
                            continue;
                        for (std::size_t k = 0; k < aBottom.dim(h); ++k)
                        {
                            SparseVector bv = unitVector(k);
                            SparseVector lhs = m.actRight(prod.first, h, prod.second, bv);
                            SparseVector mb = m1.actRight(q1, h, yv, bv);
                            auto rhs = multiply(p, c2, q2, xv, c1, m1.rightTarget(q1, h), mb);
                            if (lhs != rhs.second)
                                coherenceFailed(where, "not right linear at " + label + " · " + aBottom.basisName(h, k));
                        }
                    }
                    for (HomId h = 0; h < aMid.homCount(); ++h)
                    {
                        if (aMid.homTarget(h) != m2.space(q2).right)
                            continue;
                        for (SpaceId q0 = 0; q0 < m1.spaceCount(); ++q0)
                        {
                            if (m1.space(q0).left != aMid.homSource(h) || m1.dim(q0) == 0)
                                continue;
                            for (std::size_t k = 0; k < aMid.dim(h); ++k)
                            {
                                for (std::size_t j0 = 0; j0 < m1.dim(q0); ++j0)
                                {
                                    SparseVector bv = unitVector(k);
                                    SparseVector y0 = unitVector(j0);
                                    SparseVector xb = m2.actRight(q2, h, xv, bv);
                                    SparseVector by = m1.actLeft(h, q0, bv, y0);
                                    auto lhs = multiply(p, c2, m2.rightTarget(q2, h), xb, c1, q0, y0);
                                    auto rhs = multiply(p, c2, q2, xv, c1, m1.leftTarget(h, q0), by);
                                    if (lhs.second != rhs.second)
                                        coherenceFailed(where, "not balanced at " + aMid.basisName(h, k));
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    TensorProduct tp = tensor(m2, m1);
    for (SpaceId q = 0; q < tp.module.spaceCount(); ++q)
    {
        const Bimodule::Space& sp = tp.module.space(q);
        SpaceId t = m.spaceId(classTarget[sp.element], sp.right, sp.left);
        std::vector<QVector> columns;
        for (std::size_t k : tp.quotients[q].basisCoordinates())
        {
            for (const TensorProduct::Summand& sm : tp.summands[q])
            {
                std::size_t size = m2.dim(sm.first) * sm.width;
                if (k < sm.offset || k >= sm.offset + size)
                    continue;
                std::size_t i = (k - sm.offset) / sm.width;
                std::size_t j = (k - sm.offset) % sm.width;
                columns.push_back(toDense(multiply(p, c2, sm.first, unitVector(i), c1, sm.second, unitVector(j)).second,
                                          m.dim(t)));
            }
        }
        QMatrix map = QMatrix::fromColumns(m.dim(t), columns);
        if (!isInvertible(map))
            coherenceFailed(where, "the induced map on " + tp.module.carrier().element(sp.element).name + "(" +
                                       aBottom.objectName(sp.right) + ", " + aTop.objectName(sp.left) +
                                       ") is not invertible");
    }
}

void checkTriple(const PseudoFunctor& p, MorId c3, MorId c2, MorId c1)
{
    const FinCat& base = *p.base;
    std::string where = "(" + base.morphismName(c3) + ", " + base.morphismName(c2) + ", " + base.morphismName(c1) + ")";
    MorId c32 = base.compose(c3, c2);
    MorId c21 = base.compose(c2, c1);
    const SetBifunctor& s3 = p.edges[c3].carrier();
    const SetBifunctor& s2 = p.edges[c2].carrier();
    const SetBifunctor& s1 = p.edges[c1].carrier();
    for (std::size_t a = 0; a < s3.size(); ++a)
        for (std::size_t b = 0; b < s2.size(); ++b)
        {
            if (s3.element(a).right != s2.element(b).left)
                continue;
            for (std::size_t c = 0; c < s1.size(); ++c)
            {
                if (s2.element(b).right != s1.element(c).left)
                    continue;
                std::size_t lhs = composeElements(p, c32, composeElements(p, c3, a, c2, b), c1, c);
                std::size_t rhs = composeElements(p, c3, a, c21, composeElements(p, c2, b, c1, c));
                if (lhs != rhs)
                    coherenceFailed(where, "elements (" + s3.element(a).name + ", " + s2.element(b).name + ", " +
                                               s1.element(c).name + ")");
            }
        }
    const Bimodule& m3 = p.edges[c3];
    const Bimodule& m2 = p.edges[c2];
    const Bimodule& m1 = p.edges[c1];
    for (SpaceId q3 = 0; q3 < m3.spaceCount(); ++q3)
        for (SpaceId q2 = 0; q2 < m2.spaceCount(); ++q2)
        {
            if (m3.space(q3).right != m2.space(q2).left)
                continue;
            for (SpaceId q1 = 0; q1 < m1.spaceCount(); ++q1)
            {
                if (m2.space(q2).right != m1.space(q1).left)
                    continue;
                for (std::size_t i = 0; i < m3.dim(q3); ++i)
                    for (std::size_t j = 0; j < m2.dim(q2); ++j)
                        for (std::size_t k = 0; k < m1.dim(q1); ++k)
                        {
                            auto left = multiply(p, c3, q3, unitVector(i), c2, q2, unitVector(j));
                            auto lhs = multiply(p, c32, left.first, left.second, c1, q1, unitVector(k));
                            auto right = multiply(p, c2, q2, unitVector(j), c1, q1, unitVector(k));
                            auto rhs = multiply(p, c3, q3, unitVector(i), c21, right.first, right.second);
                            if (lhs != rhs)
                                coherenceFailed(where, "associativity at " + m3.basisName(q3, i) + ", " +
                                                           m2.basisName(q2, j) + ", " + m1.basisName(q1, k));
                        }
            }
        }
}

/**
 * The lowerStar enumeration: element ↦ (x, m) and back.
 */
struct LowerElements
{
    std::vector<std::pair<ObjId, MorId> > of;
    std::map<std::pair<ObjId, MorId>, std::size_t> index;
};

LowerElements lowerElements(const Functor& phi)
{
    LowerElements out;
    const FinCat& u = *phi.target();
    for (ObjId x = 0; x < phi.source()->objectCount(); ++x)
        for (MorId m : u.outgoing(phi.onObject(x)))
        {
            out.index[{x, m}] = out.of.size();
            out.of.emplace_back(x, m);
        }
    return out;
}

bool sameFunctor(const GradedFunctor& a, const GradedFunctor& b)
{
    if (a.objectMap() != b.objectMap() || a.base().objectMap() != b.base().objectMap() ||
        a.base().morphismMap() != b.base().morphismMap())
        return false;
    for (HomId h = 0; h < a.source()->homCount(); ++h)
        if (!(a.homMap(h) == b.homMap(h)))
            return false;
    return true;
}

/**
 * The functor 𝒞/C′ → 𝒞/C given by composing with c: C′ → C.
 */
Functor sliceFunctor(const FinCat& c, MorId along, const Slice& from, const Slice& to)
{
    const FinCat& s = *from.category;
    const FinCat& t = *to.category;
    std::vector<ObjId> objects;
    for (MorId d : from.objectMorphism)
    {
        MorId cd = c.compose(along, d);
        auto it = std::find(to.objectMorphism.begin(), to.objectMorphism.end(), cd);
        objects.push_back(static_cast<ObjId>(it - to.objectMorphism.begin()));
    }
    std::vector<MorId> morphisms;
    for (MorId m = 0; m < s.morphismCount(); ++m)
    {
        MorId image = kNone;
        for (MorId k : t.hom(objects[s.source(m)], objects[s.target(m)]))
            if (to.forget.onMorphism(k) == from.forget.onMorphism(m))
                image = k;
        morphisms.push_back(image);
    }
    return Functor::make(from.category, to.category, objects, morphisms);
}

QMatrix cohomologyMap(const HochschildComplex& source, const HochschildComplex& target, const Restriction& r,
                      std::size_t n)
{
    return inducedMap(source.segment(), target.segment(), r.map.maps[n], n, n);
}

}   // namespace

/* ------------------------------------------------------------------ */

std::size_t composeElements(const PseudoFunctor& p, MorId outer, std::size_t s2, MorId inner, std::size_t s1)
{
    const FinCat& c = *p.base;
    if (c.isIdentity(outer))
        return p.edges[inner].carrier().actLeft(s2, s1);
    if (c.isIdentity(inner))
        return p.edges[outer].carrier().actRight(s2, s1);
    auto it = p.coherence.find({outer, inner});
    if (it == p.coherence.end())
        throw Error("CoherenceFailed", pairLabel(c, outer, inner) + ": missing coherence data");
    auto e = it->second.elements.find({s2, s1});
    return e == it->second.elements.end() ? kNone : e->second;
}

std::pair<SpaceId, const std::vector<SparseVector>*> composeSpaces(const PseudoFunctor& p, MorId outer, SpaceId p2,
                                                                   MorId inner, SpaceId p1)
{
    const FinCat& c = *p.base;
    if (c.isIdentity(outer))
    {
        const Bimodule& m = p.edges[inner];
        SpaceId t = m.leftTarget(p2, p1);
        if (t == kNone)
            throw Error("NotComposable", "left action of hom " + std::to_string(p2));
        return {t, &m.leftConstants(p2, p1)};
    }
    if (c.isIdentity(inner))
    {
        const Bimodule& m = p.edges[outer];
        SpaceId t = m.rightTarget(p2, p1);
        if (t == kNone)
            throw Error("NotComposable", "right action of hom " + std::to_string(p1));
        return {t, &m.rightConstants(p2, p1)};
    }
    const Bimodule& m2 = p.edges[outer];
    const Bimodule& m1 = p.edges[inner];
    std::size_t r = composeElements(p, outer, m2.space(p2).element, inner, m1.space(p1).element);
    if (r == kNone)
        throw Error("CoherenceFailed", pairLabel(c, outer, inner) + ": missing element");
    SpaceId t = p.edges[c.compose(outer, inner)].spaceId(r, m1.space(p1).right, m2.space(p2).left);
    const auto& products = p.coherence.at({outer, inner}).products;
    auto it = products.find({p2, p1});
    if (it == products.end())
    {
        static const std::vector<SparseVector> empty;
        if (m2.dim(p2) * m1.dim(p1) > 0)
            throw Error("CoherenceFailed", pairLabel(c, outer, inner) + ": missing products");
        return {t, &empty};
    }
    return {t, &it->second};
}

void validatePseudofunctor(const PseudoFunctor& p)
{
    auto bad = [](const std::string& why) { throw Error("InvalidPseudofunctor", why); };
    if (!p.base)
        bad("no base category");
    const FinCat& c = *p.base;
    if (p.fibers.size() != c.objectCount() || p.edges.size() != c.morphismCount())
        bad("fibers or edges do not match the base");
    for (ObjId x = 0; x < c.objectCount(); ++x)
        if (!p.fibers[x])
            bad("no graded category over " + c.objectName(x));
    for (MorId m = 0; m < c.morphismCount(); ++m)
    {
        const Bimodule& e = p.edges[m];
        if (!e.left() || !sameGraded(e.left(), p.fibers[c.target(m)]) || !sameGraded(e.right(), p.fibers[c.source(m)]))
            bad("the bimodule on " + c.morphismName(m) + " does not connect the fibers of its ends");
        if (c.isIdentity(m))
        {
            const CatPtr& u = p.fibers[c.source(m)]->base();
            if (!e.carrier().sameAs(SetBifunctor::identity(u)) ||
                bimoduleDifference(e, identityBimodule(p.fibers[c.source(m)])))
                coherenceFailed(c.morphismName(m), "the bimodule on an identity is not the identity bimodule");
        }
    }
    for (const auto& [key, coh] : p.coherence)
    {
        auto [c2, c1] = key;
        if (c2 >= c.morphismCount() || c1 >= c.morphismCount() || c.isIdentity(c2) || c.isIdentity(c1) ||
            c.target(c1) != c.source(c2))
            bad("coherence given for a pair that is not a composable pair of non-identities");
    }
    std::vector<MorId> proper;
    for (MorId m = 0; m < c.morphismCount(); ++m)
        if (!c.isIdentity(m))
            proper.push_back(m);
    for (MorId c1 : proper)
        for (MorId c2 : proper)
            if (c.target(c1) == c.source(c2))
                checkPair(p, c2, c1);
    for (MorId c1 : proper)
        for (MorId c2 : proper)
        {
            if (c.target(c1) != c.source(c2))
                continue;
            for (MorId c3 : proper)
                if (c.target(c2) == c.source(c3))
                    checkTriple(p, c3, c2, c1);
        }
}

PseudoFunctor constantPseudofunctor(const CatPtr& c, const GradedPtr& a)
{
    PseudoFunctor p;
    p.base = c;
    p.fibers.assign(c->objectCount(), a);
    Bimodule id = identityBimodule(a);
    p.edges.assign(c->morphismCount(), id);
    for (MorId c1 = 0; c1 < c->morphismCount(); ++c1)
    {
        for (MorId c2 = 0; c2 < c->morphismCount(); ++c2)
        {
            if (c->isIdentity(c1) || c->isIdentity(c2) || c->target(c1) != c->source(c2))
                continue;
            Coherence coh;
            const FinCat& u = *a->base();
            for (MorId v = 0; v < u.morphismCount(); ++v)
                for (MorId w : u.outgoing(u.target(v)))
                    coh.elements[{w, v}] = u.compose(w, v);
            for (HomId f = 0; f < a->homCount(); ++f)
                for (HomId g : a->sharp()->outgoing(a->homTarget(f)))
                    coh.products[{g, f}] = a->product(g, f);
            p.coherence[{c2, c1}] = std::move(coh);
        }
    }
    return p;
}

/* ------------------------------------------------------------------ */

Grothendieck grothendieck(const PseudoFunctor& p)
{
    validatePseudofunctor(p);
    const FinCat& c = *p.base;
    Grothendieck g;
    g.diagram = p;

    CategoryBuilder cb;
    std::set<std::string> usedNames;
    for (ObjId x = 0; x < c.objectCount(); ++x)
    {
        const FinCat& u = *p.fibers[x]->base();
        for (ObjId y = 0; y < u.objectCount(); ++y)
        {
            std::string name = uniqueName(usedNames, c.objectName(x) + ":" + u.objectName(y));
            std::string idName = uniqueName(usedNames, c.objectName(x) + ":" + u.morphismName(u.identity(y)));
            ObjId id = cb.addObject(name, idName);
            g.baseObjectIndex[{x, y}] = id;
            g.baseObjects.emplace_back(x, y);
        }
    }
    for (std::size_t k = 0; k < g.baseObjects.size(); ++k)
    {
        auto [x, y] = g.baseObjects[k];
        g.baseMorphisms.emplace_back(c.identity(x), p.fibers[x]->base()->identity(y));
        g.baseMorphismIndex[g.baseMorphisms.back()] = k;
    }
    for (MorId m = 0; m < c.morphismCount(); ++m)
    {
        const SetBifunctor& s = p.edges[m].carrier();
        bool identity = c.isIdentity(m);
        const FinCat& u = *p.fibers[c.source(m)]->base();
        for (std::size_t e = 0; e < s.size(); ++e)
        {
            if (identity && u.isIdentity(e))
                continue;
            std::string name = identity ? c.objectName(c.source(m)) + ":" + u.morphismName(e)
                                        : c.morphismName(m) + ":" + s.element(e).name;
            MorId id = cb.addMorphism(uniqueName(usedNames, name), g.baseObjectIndex.at({c.source(m), s.element(e).right}),
                                      g.baseObjectIndex.at({c.target(m), s.element(e).left}));
            g.baseMorphismIndex[{m, e}] = id;
            g.baseMorphisms.emplace_back(m, e);
        }
    }
    for (MorId f = 0; f < g.baseMorphisms.size(); ++f)
    {
        auto [c1, e1] = g.baseMorphisms[f];
        for (MorId h = 0; h < g.baseMorphisms.size(); ++h)
        {
            auto [c2, e2] = g.baseMorphisms[h];
            if (c.target(c1) != c.source(c2) || p.edges[c2].carrier().element(e2).right !=
                                                     p.edges[c1].carrier().element(e1).left)
                continue;
            std::size_t r = composeElements(p, c2, e2, c1, e1);
            cb.setComposite(h, f, g.baseMorphismIndex.at({c.compose(c2, c1), r}));
        }
    }
    CatPtr tilde = cb.build();

    GradedBuilder gb(tilde);
    std::multiset<std::string> plainObjects;
    for (ObjId x = 0; x < c.objectCount(); ++x)
        for (ObjId a = 0; a < p.fibers[x]->objectCount(); ++a)
            plainObjects.insert(p.fibers[x]->objectName(a));
    std::set<std::string> usedObjects;
    for (ObjId x = 0; x < c.objectCount(); ++x)
    {
        const GradedCat& ax = *p.fibers[x];
        for (ObjId a = 0; a < ax.objectCount(); ++a)
        {
            const std::string& plain = ax.objectName(a);
            std::string name = plainObjects.count(plain) > 1 ? c.objectName(x) + ":" + plain : plain;
            ObjId id = gb.addObject(uniqueName(usedObjects, name), g.baseObjectIndex.at({x, ax.over(a)}));
            g.objectIndex[{x, a}] = id;
            g.objects.emplace_back(x, a);
        }
    }
    gb.freezeObjects();

    std::multiset<std::string> plainBasis;
    for (MorId m = 0; m < c.morphismCount(); ++m)
        for (SpaceId q = 0; q < p.edges[m].spaceCount(); ++q)
            for (std::size_t i = 0; i < p.edges[m].dim(q); ++i)
                plainBasis.insert(p.edges[m].basisName(q, i));
    std::set<std::string> usedBasis;
    std::vector<std::pair<MorId, SpaceId> > homSpaces;
    for (MorId k = 0; k < g.baseMorphisms.size(); ++k)
    {
        auto [m, e] = g.baseMorphisms[k];
        const Bimodule& bm = p.edges[m];
        const SetBifunctor::Element& el = bm.carrier().element(e);
        std::string prefix = c.isIdentity(m) ? c.objectName(c.source(m)) : c.morphismName(m);
        for (ObjId a : p.fibers[c.source(m)]->fiber(el.right))
        {
            for (ObjId a2 : p.fibers[c.target(m)]->fiber(el.left))
            {
                SpaceId q = bm.spaceId(e, a, a2);
                HomId h = gb.homId(k, g.objectIndex.at({c.source(m), a}), g.objectIndex.at({c.target(m), a2}));
                if (homSpaces.size() <= h)
                    homSpaces.resize(h + 1);
                homSpaces[h] = {m, q};
                std::vector<std::string> names;
                for (std::size_t i = 0; i < bm.dim(q); ++i)
                {
                    const std::string& plain = bm.basisName(q, i);
                    names.push_back(uniqueName(usedBasis, plainBasis.count(plain) > 1 ? prefix + ":" + plain : plain));
                }
                gb.setBasis(h, names);
            }
        }
    }
    g.homSpaces = homSpaces;
    const FinCat& sharpBase = *tilde;
    (void)sharpBase;
    std::vector<std::vector<HomId> > from(g.objects.size());
    std::vector<ObjId> homSource(homSpaces.size());
    std::vector<ObjId> homTarget(homSpaces.size());
    for (HomId h = 0; h < homSpaces.size(); ++h)
    {
        auto [m, q] = homSpaces[h];
        const Bimodule::Space& sp = p.edges[m].space(q);
        homSource[h] = g.objectIndex.at({c.source(m), sp.right});
        homTarget[h] = g.objectIndex.at({c.target(m), sp.left});
        from[homSource[h]].push_back(h);
    }
    for (HomId f = 0; f < homSpaces.size(); ++f)
    {
        auto [m1, q1] = homSpaces[f];
        for (HomId h : from[homTarget[f]])
        {
            auto [m2, q2] = homSpaces[h];
            auto [t, constants] = composeSpaces(p, m2, q2, m1, q1);
            (void)t;
            std::size_t width = p.edges[m1].dim(q1);
            for (std::size_t i = 0; i < p.edges[m2].dim(q2); ++i)
                for (std::size_t j = 0; j < width; ++j)
                    gb.setProduct(h, i, f, j, (*constants)[i * width + j]);
        }
    }
    for (ObjId k = 0; k < g.objects.size(); ++k)
    {
        auto [x, a] = g.objects[k];
        gb.setUnit(k, p.fibers[x]->unit(a));
    }
    g.category = gb.build();
    return g;
}

GradedFunctor grothendieckFunctor(const Grothendieck& source, const Grothendieck& target, const Functor& psi)
{
    for (ObjId d = 0; d < source.diagram.fibers.size(); ++d)
        if (source.diagram.fibers[d] != target.diagram.fibers[psi.onObject(d)])
            throw Error("InvalidFunctor", "the diagrams do not agree along the base functor");
    std::vector<ObjId> baseObjects;
    for (auto [d, u] : source.baseObjects)
        baseObjects.push_back(target.baseObjectIndex.at({psi.onObject(d), u}));
    std::vector<MorId> baseMorphisms;
    for (auto [m, e] : source.baseMorphisms)
        baseMorphisms.push_back(target.baseMorphismIndex.at({psi.onMorphism(m), e}));
    Functor base = Functor::make(source.category->base(), target.category->base(), baseObjects, baseMorphisms);
    std::vector<ObjId> objects;
    for (auto [d, a] : source.objects)
        objects.push_back(target.objectIndex.at({psi.onObject(d), a}));
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < source.category->homCount(); ++h)
        maps.push_back(QMatrix::identity(source.category->dim(h)));
    return GradedFunctor::make(source.category, target.category, base, objects, maps);
}

GradedFunctor fiberInclusion(const Grothendieck& g, ObjId d)
{
    const GradedPtr& a = g.diagram.fibers[d];
    const FinCat& u = *a->base();
    MorId id = g.diagram.base->identity(d);
    std::vector<ObjId> baseObjects;
    for (ObjId y = 0; y < u.objectCount(); ++y)
        baseObjects.push_back(g.baseObjectIndex.at({d, y}));
    std::vector<MorId> baseMorphisms;
    for (MorId m = 0; m < u.morphismCount(); ++m)
        baseMorphisms.push_back(g.baseMorphismIndex.at({id, m}));
    Functor base = Functor::make(a->base(), g.category->base(), baseObjects, baseMorphisms);
    std::vector<ObjId> objects;
    for (ObjId x = 0; x < a->objectCount(); ++x)
        objects.push_back(g.objectIndex.at({d, x}));
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < a->homCount(); ++h)
        maps.push_back(QMatrix::identity(a->dim(h)));
    return GradedFunctor::make(a, g.category, base, objects, maps);
}

/* ------------------------------------------------------------------ */

BaseChange baseChange(const Grothendieck& g, const Functor& phi)
{
    const PseudoFunctor& p = g.diagram;
    if (!phi.target()->sameAs(*p.base))
        throw Error("TargetMismatch", "the base functor does not end in the base of the diagram");
    const FinCat& d = *phi.source();
    BaseChange out;
    PseudoFunctor& q = out.diagram;
    q.base = phi.source();
    for (ObjId x = 0; x < d.objectCount(); ++x)
        q.fibers.push_back(p.fibers[phi.onObject(x)]);
    for (MorId m = 0; m < d.morphismCount(); ++m)
        q.edges.push_back(p.edges[phi.onMorphism(m)]);
    for (MorId d1 = 0; d1 < d.morphismCount(); ++d1)
    {
        for (MorId d2 = 0; d2 < d.morphismCount(); ++d2)
        {
            if (d.isIdentity(d1) || d.isIdentity(d2) || d.target(d1) != d.source(d2))
                continue;
            MorId c1 = phi.onMorphism(d1);
            MorId c2 = phi.onMorphism(d2);
            const Bimodule& m1 = p.edges[c1];
            const Bimodule& m2 = p.edges[c2];
            Coherence coh;
            for (std::size_t a = 0; a < m2.carrier().size(); ++a)
                for (std::size_t b = 0; b < m1.carrier().size(); ++b)
                    if (m2.carrier().element(a).right == m1.carrier().element(b).left)
                        coh.elements[{a, b}] = composeElements(p, c2, a, c1, b);
            for (SpaceId q2 = 0; q2 < m2.spaceCount(); ++q2)
                for (SpaceId q1 = 0; q1 < m1.spaceCount(); ++q1)
                    if (m2.space(q2).right == m1.space(q1).left)
                        coh.products[{q2, q1}] = *composeSpaces(p, c2, q2, c1, q1).second;
            q.coherence[{d2, d1}] = std::move(coh);
        }
    }
    out.total = grothendieck(q);
    out.functor = grothendieckFunctor(out.total, g, phi);
    return out;
}

/* ------------------------------------------------------------------ */

CStarReport cstarDiagram(const PseudoFunctor& p, const std::vector<ObjId>& anchors, std::size_t maxDegree,
                         SignConvention convention)
{
    const CatPtr& base = p.base;
    const FinCat& c = *base;
    CStarReport out;
    out.anchors = anchors;
    for (ObjId x = 0; x < c.objectCount(); ++x)
    {
        bool reached = false;
        for (ObjId a : anchors)
            reached = reached || !c.hom(x, a).empty();
        if (!reached)
            throw Error("NoAnchorMap", c.objectName(x));
    }
    for (std::size_t i = 0; i < anchors.size(); ++i)
        for (std::size_t j = i + 1; j < anchors.size(); ++j)
        {
            auto cone = findProduct(c, anchors[i], anchors[j]);
            if (!cone)
                throw Error("MissingProduct", c.objectName(anchors[i]) + ", " + c.objectName(anchors[j]));
            out.products[{i, j}] = *cone;
        }

    CatPtr e = terminalCategory();
    std::vector<SetBifunctor::Element> elements;
    for (ObjId x = 0; x < c.objectCount(); ++x)
        elements.push_back({"*_" + c.objectName(x), x, 0});
    std::vector<std::vector<std::size_t> > leftAction(1, std::vector<std::size_t>(c.objectCount()));
    for (ObjId x = 0; x < c.objectCount(); ++x)
        leftAction[0][x] = x;
    std::vector<std::vector<std::size_t> > rightAction(c.objectCount(), std::vector<std::size_t>(c.morphismCount(), kNone));
    for (MorId m = 0; m < c.morphismCount(); ++m)
        rightAction[c.target(m)][m] = c.source(m);
    out.star = arrowCategoryBase(SetBifunctor::make(e, base, elements, leftAction, rightAction));

    Grothendieck g = grothendieck(p);
    std::vector<GradedFunctor> family;
    for (ObjId a : anchors)
    {
        out.pieces.push_back(baseChange(g, sliceCategory(base, a).forget));
        family.push_back(out.pieces.back().functor);
    }
    HochschildComplex complex = buildComplex(g.category, maxDegree, convention);
    out.report = sheafCheck(complex, family);
    out.report.label = "cstar";
    return out;
}

/* ------------------------------------------------------------------ */

ChainCoverReport chainCoverMv(const PseudoFunctor& p, std::size_t maxDegree, SignConvention convention)
{
    ChainCoverReport out;
    out.cover = chainCover(p.base);
    Grothendieck g = grothendieck(p);
    std::vector<GradedFunctor> family;
    for (const Subcategory& piece : out.cover.pieces)
    {
        out.pieces.push_back(baseChange(g, embedSubcategory(piece).inclusion));
        family.push_back(out.pieces.back().functor);
    }
    HochschildComplex complex = buildComplex(g.category, maxDegree, convention);
    out.sheaf = sheafCheck(complex, family);
    out.sheaf.label = "chain-cover";
    if (family.size() == 2)
    {
        out.mayerVietoris = mayerVietoris(complex, family[0], family[1]);
        out.mayerVietoris->label = "chain-mv";
    }
    return out;
}

/* ------------------------------------------------------------------ */

ArrowDecomposition arrowDecomposition(const Grothendieck& g, const std::vector<char>& ideal)
{
    const PseudoFunctor& p = g.diagram;
    const FinCat& c = *p.base;
    ArrowRecognition rec = recognizeArrow(p.base, ideal, true);
    if (!rec.ok)
        throw Error("NotArrowShaped", rec.failure + ": " + rec.detail);
    SubcategoryEmbedding belowEmb = embedSubcategory(rec.below);
    SubcategoryEmbedding aboveEmb = embedSubcategory(rec.above);
    ArrowDecomposition out;
    out.below = baseChange(g, belowEmb.inclusion);
    out.above = baseChange(g, aboveEmb.inclusion);
    const Grothendieck& lo = out.below.total;
    const Grothendieck& hi = out.above.total;
    const Functor& loInc = belowEmb.inclusion;
    const Functor& hiInc = aboveEmb.inclusion;
    std::map<ObjId, ObjId> loObject;
    std::map<ObjId, ObjId> hiObject;
    for (ObjId x = 0; x < loInc.source()->objectCount(); ++x)
        loObject[loInc.onObject(x)] = x;
    for (ObjId x = 0; x < hiInc.source()->objectCount(); ++x)
        hiObject[hiInc.onObject(x)] = x;

    // Carrier T: the cross morphisms (z, s) of Ũ.
    std::vector<std::pair<MorId, std::size_t> > cross;
    std::map<std::pair<MorId, std::size_t>, std::size_t> crossIndex;
    std::vector<SetBifunctor::Element> elements;
    for (MorId k = 0; k < g.baseMorphisms.size(); ++k)
    {
        auto [z, s] = g.baseMorphisms[k];
        if (!ideal[z])
            continue;
        const SetBifunctor::Element& el = p.edges[z].carrier().element(s);
        crossIndex[{z, s}] = cross.size();
        cross.emplace_back(z, s);
        elements.push_back({g.category->base()->morphismName(k),
                            lo.baseObjectIndex.at({loObject.at(c.source(z)), el.right}),
                            hi.baseObjectIndex.at({hiObject.at(c.target(z)), el.left})});
    }
    const FinCat& hiBase = *hi.category->base();
    const FinCat& loBase = *lo.category->base();
    std::vector<std::vector<std::size_t> > leftAction(hiBase.morphismCount(), std::vector<std::size_t>(cross.size(), kNone));
    std::vector<std::vector<std::size_t> > rightAction(cross.size(), std::vector<std::size_t>(loBase.morphismCount(), kNone));
    for (std::size_t t = 0; t < cross.size(); ++t)
    {
        auto [z, s] = cross[t];
        for (MorId u = 0; u < hiBase.morphismCount(); ++u)
        {
            if (hiBase.source(u) != elements[t].left)
                continue;
            auto [eLocal, s2] = hi.baseMorphisms[u];
            MorId e = hiInc.onMorphism(eLocal);
            leftAction[u][t] = crossIndex.at({c.compose(e, z), composeElements(p, e, s2, z, s)});
        }
        for (MorId v = 0; v < loBase.morphismCount(); ++v)
        {
            if (loBase.target(v) != elements[t].right)
                continue;
            auto [dLocal, s0] = lo.baseMorphisms[v];
            MorId d = loInc.onMorphism(dLocal);
            rightAction[t][v] = crossIndex.at({c.compose(z, d), composeElements(p, z, s, d, s0)});
        }
    }
    SetBifunctor carrier = SetBifunctor::make(hi.category->base(), lo.category->base(), elements, leftAction, rightAction);

    BimoduleBuilder builder(hi.category, lo.category, carrier);
    std::vector<SpaceId> spaceOf(builder.spaceCount());
    for (SpaceId q = 0; q < builder.spaceCount(); ++q)
    {
        const Bimodule::Space& sp = builder.space(q);
        auto [z, s] = cross[sp.element];
        ObjId a = lo.objects[sp.right].second;
        ObjId a2 = hi.objects[sp.left].second;
        spaceOf[q] = p.edges[z].spaceId(s, a, a2);
        std::vector<std::string> names;
        for (std::size_t i = 0; i < p.edges[z].dim(spaceOf[q]); ++i)
            names.push_back(g.category->basisName(g.category->homId(g.baseMorphismIndex.at({z, s}),
                                                                    g.objectIndex.at({c.source(z), a}),
                                                                    g.objectIndex.at({c.target(z), a2})),
                                                  i));
        builder.setBasis(q, names);
    }
    for (SpaceId q = 0; q < builder.spaceCount(); ++q)
    {
        const Bimodule::Space sp = builder.space(q);
        auto [z, s] = cross[sp.element];
        std::size_t width = p.edges[z].dim(spaceOf[q]);
        for (HomId h = 0; h < hi.category->homCount(); ++h)
        {
            if (hi.category->homSource(h) != sp.left)
                continue;
            auto [eLocal, qh] = hi.homSpaces[h];
            auto [t, constants] = composeSpaces(p, hiInc.onMorphism(eLocal), qh, z, spaceOf[q]);
            (void)t;
            for (std::size_t i = 0; i < hi.category->dim(h); ++i)
                for (std::size_t j = 0; j < width; ++j)
                    builder.setLeft(h, i, q, j, (*constants)[i * width + j]);
        }
        for (HomId h = 0; h < lo.category->homCount(); ++h)
        {
            if (lo.category->homTarget(h) != sp.right)
                continue;
            auto [dLocal, qh] = lo.homSpaces[h];
            auto [t, constants] = composeSpaces(p, z, spaceOf[q], loInc.onMorphism(dLocal), qh);
            (void)t;
            std::size_t hw = lo.category->dim(h);
            for (std::size_t i = 0; i < width; ++i)
                for (std::size_t j = 0; j < hw; ++j)
                    builder.setRight(q, i, h, j, (*constants)[i * hw + j]);
        }
    }
    out.bimodule = builder.build();
    out.arrow = arrowCategory(out.bimodule);

    const ArrowGraded& ar = out.arrow;
    const FinCat& w = *ar.base.category;
    std::vector<ObjId> baseObjects(w.objectCount(), kNone);
    std::vector<MorId> baseMorphisms(w.morphismCount(), kNone);
    for (ObjId x = 0; x < loBase.objectCount(); ++x)
    {
        auto [d, u] = lo.baseObjects[x];
        baseObjects[ar.base.fromRight.onObject(x)] = g.baseObjectIndex.at({loInc.onObject(d), u});
    }
    for (ObjId x = 0; x < hiBase.objectCount(); ++x)
    {
        auto [d, u] = hi.baseObjects[x];
        baseObjects[ar.base.fromLeft.onObject(x)] = g.baseObjectIndex.at({hiInc.onObject(d), u});
    }
    for (MorId m = 0; m < loBase.morphismCount(); ++m)
    {
        auto [d, s] = lo.baseMorphisms[m];
        baseMorphisms[ar.base.fromRight.onMorphism(m)] = g.baseMorphismIndex.at({loInc.onMorphism(d), s});
    }
    for (MorId m = 0; m < hiBase.morphismCount(); ++m)
    {
        auto [d, s] = hi.baseMorphisms[m];
        baseMorphisms[ar.base.fromLeft.onMorphism(m)] = g.baseMorphismIndex.at({hiInc.onMorphism(d), s});
    }
    for (std::size_t t = 0; t < cross.size(); ++t)
        baseMorphisms[ar.base.crossMorphism[t]] = g.baseMorphismIndex.at(cross[t]);
    Functor base = Functor::make(ar.base.category, g.category->base(), baseObjects, baseMorphisms);

    const GradedCat& arrowCat = *ar.category;
    std::vector<ObjId> objects(arrowCat.objectCount(), kNone);
    for (ObjId x = 0; x < lo.objects.size(); ++x)
    {
        auto [d, a] = lo.objects[x];
        objects[ar.fromRight.onObject(x)] = g.objectIndex.at({loInc.onObject(d), a});
    }
    for (ObjId x = 0; x < hi.objects.size(); ++x)
    {
        auto [d, a] = hi.objects[x];
        objects[ar.fromLeft.onObject(x)] = g.objectIndex.at({hiInc.onObject(d), a});
    }
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < arrowCat.homCount(); ++h)
    {
        HomId image = g.category->homId(base.onMorphism(arrowCat.homMorphism(h)), objects[arrowCat.homSource(h)],
                                         objects[arrowCat.homTarget(h)]);
        if (g.category->dim(image) != arrowCat.dim(h))
            throw Error("NotArrowShaped", "hom dimensions differ at " + arrowCat.sharp()->morphismName(h));
        maps.push_back(QMatrix::identity(arrowCat.dim(h)));
    }
    out.comparison = GradedFunctor::make(ar.category, g.category, base, objects, maps);

    std::vector<ObjId> sortedObjects = objects;
    std::sort(sortedObjects.begin(), sortedObjects.end());
    bool objectsBijective = sortedObjects.size() == g.category->objectCount() &&
                            std::adjacent_find(sortedObjects.begin(), sortedObjects.end()) == sortedObjects.end();
    out.isomorphism = base.isBijective() && objectsBijective && out.comparison.sharpFunctor().isBijective();
    return out;
}

std::vector<ArrowDecomposition> unrollChain(const Grothendieck& g)
{
    std::vector<ArrowDecomposition> out;
    const Grothendieck* current = &g;
    while (current->diagram.base->objectCount() >= 2)
    {
        const FinCat& c = *current->diagram.base;
        if (!isPoset(c))
            throw Error("NotAChain", "the base is not a poset");
        ObjId bottom = kNone;
        for (ObjId x = 0; x < c.objectCount(); ++x)
        {
            bool minimal = true;
            for (ObjId y = 0; y < c.objectCount(); ++y)
            {
                if (x != y && c.hom(x, y).empty() && c.hom(y, x).empty())
                    throw Error("NotAChain", c.objectName(x) + " and " + c.objectName(y) + " are incomparable");
                if (x != y && !c.hom(y, x).empty())
                    minimal = false;
            }
            if (minimal)
                bottom = x;
        }
        std::vector<char> ideal(c.morphismCount(), 0);
        for (MorId m : c.outgoing(bottom))
            ideal[m] = !c.isIdentity(m);
        out.push_back(arrowDecomposition(*current, ideal));
        current = &out.back().above.total;
    }
    return out;
}

/* ------------------------------------------------------------------ */

PseudoFunctor toPseudofunctor(const FunctorialDiagram& d)
{
    const FinCat& c = *d.base;
    if (d.fibers.size() != c.objectCount() || d.functors.size() != c.morphismCount())
        throw Error("InvalidPseudofunctor", "fibers or functors do not match the base");
    for (MorId m = 0; m < c.morphismCount(); ++m)
    {
        const GradedFunctor& f = d.functors[m];
        if (!f.source() || !sameGraded(f.source(), d.fibers[c.source(m)]) || !sameGraded(f.target(), d.fibers[c.target(m)]))
            throw Error("InvalidPseudofunctor", "the functor on " + c.morphismName(m) + " does not connect its fibers");
        if (c.isIdentity(m) && !sameFunctor(f, GradedFunctor::identity(d.fibers[c.source(m)])))
            coherenceFailed(c.morphismName(m), "the functor on an identity is not the identity");
    }
    for (MorId c1 = 0; c1 < c.morphismCount(); ++c1)
        for (MorId c2 = 0; c2 < c.morphismCount(); ++c2)
            if (c.target(c1) == c.source(c2) &&
                !sameFunctor(GradedFunctor::compose(d.functors[c2], d.functors[c1]), d.functors[c.compose(c2, c1)]))
                coherenceFailed(pairLabel(c, c2, c1), "the functors do not compose strictly");

    PseudoFunctor p;
    p.base = d.base;
    p.fibers = d.fibers;
    for (MorId m = 0; m < c.morphismCount(); ++m)
        p.edges.push_back(c.isIdentity(m) ? identityBimodule(d.fibers[c.source(m)]) : lowerBimodule(d.functors[m]));
    for (MorId c1 = 0; c1 < c.morphismCount(); ++c1)
    {
        for (MorId c2 = 0; c2 < c.morphismCount(); ++c2)
        {
            if (c.isIdentity(c1) || c.isIdentity(c2) || c.target(c1) != c.source(c2))
                continue;
            const GradedFunctor& f1 = d.functors[c1];
            const GradedFunctor& f2 = d.functors[c2];
            LowerElements e1 = lowerElements(f1.base());
            LowerElements e2 = lowerElements(f2.base());
            LowerElements e21 = lowerElements(d.functors[c.compose(c2, c1)].base());
            const FinCat& top = *d.fibers[c.target(c2)]->base();
            Coherence coh;
            for (std::size_t a = 0; a < e2.of.size(); ++a)
            {
                auto [x2, m2] = e2.of[a];
                for (std::size_t b = 0; b < e1.of.size(); ++b)
                {
                    auto [x1, m1] = e1.of[b];
                    if (f1.base().target()->target(m1) != x2)
                        continue;
                    coh.elements[{a, b}] = e21.index.at({x1, top.compose(m2, f2.base().onMorphism(m1))});
                }
            }
            const Bimodule& b1 = p.edges[c1];
            const Bimodule& b2 = p.edges[c2];
            const GradedCat& mid = *d.fibers[c.target(c1)];
            const GradedCat& high = *d.fibers[c.target(c2)];
            for (SpaceId q2 = 0; q2 < b2.spaceCount(); ++q2)
            {
                for (SpaceId q1 = 0; q1 < b1.spaceCount(); ++q1)
                {
                    const Bimodule::Space& sp2 = b2.space(q2);
                    const Bimodule::Space& sp1 = b1.space(q1);
                    if (sp2.right != sp1.left)
                        continue;
                    HomId h1 = mid.homId(e1.of[sp1.element].second, f1.onObject(sp1.right), sp1.left);
                    HomId h2 = high.homId(e2.of[sp2.element].second, f2.onObject(sp2.right), sp2.left);
                    std::vector<SparseVector> values;
                    for (std::size_t i = 0; i < high.dim(h2); ++i)
                        for (std::size_t j = 0; j < mid.dim(h1); ++j)
                            values.push_back(high.compose(h2, f2.onHom(h1), unitVector(i),
                                                          toSparse(f2.homMap(h1).column(j))));
                    coh.products[{q2, q1}] = std::move(values);
                }
            }
            p.coherence[{c2, c1}] = std::move(coh);
        }
    }
    return p;
}

bool ComparisonReport::holds() const
{
    for (const auto& degrees : objects)
        for (const ComparisonDegree& d : degrees)
            if (!d.isomorphism)
                return false;
    for (const ComparisonSquare& s : squares)
        for (char ok : s.commutes)
            if (!ok)
                return false;
    return true;
}

ComparisonReport comparisonCheck(const FunctorialDiagram& d, std::size_t maxDegree, SignConvention convention)
{
    const FinCat& c = *d.base;
    if (!isDelta(c))
        throw Error("NotADelta", "the base has arrows both ways between two objects");
    if (d.fibers.size() != c.objectCount() || d.functors.size() != c.morphismCount())
        throw Error("InvalidPseudofunctor", "fibers or functors do not match the base");
    for (MorId m = 0; m < c.morphismCount(); ++m)
        if (!d.functors[m].isSubcartesian())
            throw Error("NotSubcartesian", c.morphismName(m));
    PseudoFunctor p = toPseudofunctor(d);
    Grothendieck g = grothendieck(p);

    ComparisonReport out;
    out.truncation = maxDegree;
    out.convention = convention;
    std::size_t n = c.objectCount();
    std::vector<Slice> slices;
    std::vector<BaseChange> restricted;
    std::vector<HochschildComplex> totals;
    std::vector<HochschildComplex> fibers;
    std::vector<std::vector<QMatrix> > onCohomology(n);
    for (ObjId x = 0; x < n; ++x)
    {
        slices.push_back(sliceCategory(d.base, x));
        restricted.push_back(baseChange(g, slices[x].forget));
        totals.push_back(buildComplex(restricted[x].total.category, maxDegree, convention));
        fibers.push_back(buildComplex(d.fibers[x], maxDegree, convention));
        Restriction r = restrictIntrinsic(fiberInclusion(restricted[x].total, slices[x].terminal), totals[x]);
        std::vector<ComparisonDegree> degrees;
        for (std::size_t k = 0; k < maxDegree; ++k)
        {
            QMatrix map = cohomologyMap(totals[x], fibers[x], r, k);
            onCohomology[x].push_back(map);
            ComparisonDegree cd;
            cd.degree = k;
            cd.total = map.cols();
            cd.fiber = map.rows();
            cd.isomorphism = isInvertible(map);
            degrees.push_back(cd);
        }
        out.objects.push_back(degrees);
    }
    for (MorId m = 0; m < c.morphismCount(); ++m)
    {
        if (c.isIdentity(m))
            continue;
        ObjId from = c.source(m);
        ObjId to = c.target(m);
        Functor psi = sliceFunctor(c, m, slices[from], slices[to]);
        Restriction tilde = restrictIntrinsic(grothendieckFunctor(restricted[from].total, restricted[to].total, psi),
                                              totals[to]);
        Restriction direct = restrictIntrinsic(d.functors[m], fibers[to]);
        ComparisonSquare sq;
        sq.morphism = m;
        for (std::size_t k = 0; k < maxDegree; ++k)
        {
            QMatrix lhs = onCohomology[from][k] * cohomologyMap(totals[to], totals[from], tilde, k);
            QMatrix rhs = cohomologyMap(fibers[to], fibers[from], direct, k) * onCohomology[to][k];
            sq.commutes.push_back(lhs == rhs);
        }
        out.squares.push_back(sq);
    }
    return out;
}

}   // namespace mgc
