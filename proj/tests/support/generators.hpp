/**
 * Hand-rolled random generators for small categories, functors and
 * bifunctors used by the property tests.
 */

#ifndef MGC_TEST_GENERATORS_HPP
#define MGC_TEST_GENERATORS_HPP

#include <random>
#include <string>
#include <vector>
#include "mgc/fincat.hpp"
#include "mgc/graded.hpp"

namespace mgc::gen {

inline CatPtr aTwo()
{
    CategoryBuilder b;
    b.addObject("0", "id0");
    b.addObject("1", "id1");
    b.addMorphism("u", 0, 1);
    return b.build();
}

inline CatPtr vPoset()
{
    return posetCategory({"s", "t0", "t1"}, {{"s", "t0"}, {"s", "t1"}});
}

inline CatPtr grid()
{
    return posetCategory({"b", "l", "r", "t"}, {{"b", "l"}, {"b", "r"}, {"l", "t"}, {"r", "t"}});
}

/**
 * Random poset on n objects: relations i < j kept with probability 1/2,
 * closed transitively.
 */
inline CatPtr randomPoset(std::mt19937& rng, std::size_t n)
{
    std::vector<std::string> objects;
    std::vector<std::pair<std::string, std::string> > relations;
    for (std::size_t i = 0; i < n; ++i)
        objects.push_back("p" + std::to_string(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng() % 2)
                relations.emplace_back(objects[i], objects[j]);
    return posetCategory(objects, relations);
}

/**
 * A few one-object categories from small monoids.
 */
inline CatPtr randomMonoid(std::mt19937& rng)
{
    switch (rng() % 3)
    {
        case 0:
            return monoidCategory({"1", "g"}, {{0, 1}, {1, 0}});
        case 1:
            return monoidCategory({"1", "z"}, {{0, 1}, {1, 1}});
        default:
            return monoidCategory({"1", "a", "b"}, {{0, 1, 2}, {1, 1, 1}, {2, 2, 2}});
    }
}

/**
 * Random category: a random poset or a one-object monoid.
 */
inline CatPtr randomCategory(std::mt19937& rng)
{
    if (rng() % 3 != 0)
        return randomPoset(rng, 1 + rng() % 4);
    return randomMonoid(rng);
}

/**
 * Random subcategory generated by a random set of morphisms and objects.
 */
inline Subcategory randomSubcategory(std::mt19937& rng, const CatPtr& c)
{
    std::vector<ObjId> objs;
    std::vector<MorId> mors;
    for (ObjId x = 0; x < c->objectCount(); ++x)
        if (rng() % 2)
            objs.push_back(x);
    for (MorId u = 0; u < c->morphismCount(); ++u)
        if (rng() % 3 == 0)
            mors.push_back(u);
    return generatedSubcategory(c, objs, mors);
}

/**
 * Random decomposition Mor = Z ⊔ Mor(V): a random set D of objects closed
 * under incoming morphisms, Z the morphisms from D to its complement and V
 * the rest.  Only valid when no morphism leaves the complement into D.
 */
struct Decomposition
{
    std::vector<char> ideal;
    Subcategory complement;
};

inline Decomposition randomDecomposition(std::mt19937& rng, const CatPtr& c)
{
    std::vector<char> inD(c->objectCount(), 0);
    for (ObjId x = 0; x < c->objectCount(); ++x)
        inD[x] = rng() % 2;
    for (bool changed = true; changed;)
    {
        changed = false;
        for (MorId m = 0; m < c->morphismCount(); ++m)
            if (inD[c->target(m)] && !inD[c->source(m)])
            {
                inD[c->source(m)] = 1;
                changed = true;
            }
    }
    Decomposition d;
    d.ideal.assign(c->morphismCount(), 0);
    d.complement = {c, std::vector<char>(c->objectCount(), 1), std::vector<char>(c->morphismCount(), 1)};
    for (MorId m = 0; m < c->morphismCount(); ++m)
        if (inD[c->source(m)] && !inD[c->target(m)])
        {
            d.ideal[m] = 1;
            d.complement.morphisms[m] = 0;
        }
    return d;
}

/**
 * Random bifunctor between two random posets: S(V, U) is a singleton for
 * pairs in a relation that is down-closed in V and up-closed in U.
 */
inline SetBifunctor randomPosetBifunctor(std::mt19937& rng)
{
    CatPtr u = randomPoset(rng, 1 + rng() % 3);
    CatPtr v = randomPoset(rng, 1 + rng() % 3);
    std::vector<std::vector<char> > rel(v->objectCount(), std::vector<char>(u->objectCount(), 0));
    for (ObjId y = 0; y < v->objectCount(); ++y)
        for (ObjId x = 0; x < u->objectCount(); ++x)
            if (rng() % 2)
                for (ObjId y2 = 0; y2 < v->objectCount(); ++y2)
                    for (ObjId x2 = 0; x2 < u->objectCount(); ++x2)
                        if (!v->hom(y2, y).empty() && !u->hom(x, x2).empty())
                            rel[y2][x2] = 1;
    std::vector<SetBifunctor::Element> elements;
    std::vector<std::vector<std::size_t> > id(v->objectCount(), std::vector<std::size_t>(u->objectCount(), kNone));
    for (ObjId y = 0; y < v->objectCount(); ++y)
        for (ObjId x = 0; x < u->objectCount(); ++x)
            if (rel[y][x])
            {
                id[y][x] = elements.size();
                elements.push_back({"s" + std::to_string(y) + "_" + std::to_string(x), y, x});
            }
    std::vector<std::vector<std::size_t> > left(u->morphismCount(), std::vector<std::size_t>(elements.size(), kNone));
    std::vector<std::vector<std::size_t> > right(elements.size(), std::vector<std::size_t>(v->morphismCount(), kNone));
    for (std::size_t s = 0; s < elements.size(); ++s)
    {
        for (MorId m : u->outgoing(elements[s].left))
            left[m][s] = id[elements[s].right][u->target(m)];
        for (MorId m = 0; m < v->morphismCount(); ++m)
            if (v->target(m) == elements[s].right)
                right[s][m] = id[v->source(m)][elements[s].left];
    }
    return SetBifunctor::make(u, v, elements, left, right);
}

/* ------------------------------------------------------------------ */

/**
 * Q[x]/(x²).
 */
inline GradedPtr dualNumbers()
{
    return dualNumbersGraded();
}

/**
 * The group algebra of Z/2 with basis {1, g}.
 */
inline GradedPtr groupAlgebraZ2()
{
    QVector one{1, 0}, g{0, 1};
    return algebraGraded("G", {"1", "g"}, {{one, g}, {g, one}}, one);
}

/**
 * Upper triangular 2x2 matrices over Q with basis {e11, e12, e22}.
 */
inline GradedPtr upperTriangular()
{
    QVector e11{1, 0, 0}, e12{0, 1, 0}, e22{0, 0, 1}, z{0, 0, 0};
    return algebraGraded("T", {"e11", "e12", "e22"},
                         {{e11, e12, z}, {z, z, e12}, {z, z, e22}}, QVector{1, 0, 1});
}

/**
 * kU ⊗ A for an algebra A trivially graded over e: every hom space is a
 * copy of A and products multiply in A.
 */
inline GradedPtr tensorWithAlgebra(const CatPtr& u, const GradedPtr& alg)
{
    GradedBuilder b(u);
    for (ObjId x = 0; x < u->objectCount(); ++x)
        b.addObject(u->objectName(x), x);
    b.freezeObjects();
    std::size_t d = alg->dim(0);
    for (MorId m = 0; m < u->morphismCount(); ++m)
    {
        std::vector<std::string> names;
        for (std::size_t i = 0; i < d; ++i)
            names.push_back(u->morphismName(m) + "." + alg->basisName(0, i));
        b.setBasis(b.homId(m, u->source(m), u->target(m)), names);
    }
    for (MorId f = 0; f < u->morphismCount(); ++f)
        for (MorId g : u->outgoing(u->target(f)))
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < d; ++j)
                    b.setProduct(b.homId(g, u->source(g), u->target(g)), i, b.homId(f, u->source(f), u->target(f)), j,
                                 alg->product(0, 0)[i * d + j]);
    for (ObjId x = 0; x < u->objectCount(); ++x)
        b.setUnit(x, alg->unit(0));
    return b.build();
}

/**
 * Fibers of the given sizes over every object of U and one-dimensional
 * hom spaces everywhere; composition follows U#.
 */
inline GradedPtr inflated(const CatPtr& u, const std::vector<std::size_t>& sizes)
{
    GradedBuilder b(u);
    std::vector<std::vector<ObjId> > fibers(u->objectCount());
    for (ObjId x = 0; x < u->objectCount(); ++x)
        for (std::size_t k = 0; k < sizes[x]; ++k)
            fibers[x].push_back(b.addObject(u->objectName(x) + "_" + std::to_string(k), x));
    b.freezeObjects();
    for (MorId m = 0; m < u->morphismCount(); ++m)
        for (ObjId a : fibers[u->source(m)])
            for (ObjId c : fibers[u->target(m)])
                b.setBasis(b.homId(m, a, c), {u->morphismName(m) + "." + std::to_string(a) + "." + std::to_string(c)});
    for (MorId f = 0; f < u->morphismCount(); ++f)
        for (MorId g : u->outgoing(u->target(f)))
            for (ObjId a : fibers[u->source(f)])
                for (ObjId c : fibers[u->target(f)])
                    for (ObjId e : fibers[u->target(g)])
                        b.setProduct(b.homId(g, c, e), 0, b.homId(f, a, c), 0, {{0, Rational(1)}});
    for (ObjId x = 0; x < u->objectCount(); ++x)
        for (ObjId a : fibers[x])
            b.setUnit(a, {{0, Rational(1)}});
    return b.build();
}

/**
 * A random invertible matrix: unit lower times unit upper triangular
 * with small integer entries, times a diagonal.
 */
inline QMatrix randomInvertible(std::mt19937& rng, std::size_t n)
{
    QMatrix lower = QMatrix::identity(n);
    QMatrix upper = QMatrix::identity(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        upper.set(i, i, Rational(static_cast<int>(1 + rng() % 3)) * (rng() % 2 ? 1 : -1));
        for (std::size_t j = 0; j < i; ++j)
        {
            lower.set(i, j, Rational(static_cast<int>(rng() % 5) - 2));
            upper.set(j, i, Rational(static_cast<int>(rng() % 5) - 2, 1 + rng() % 2));
        }
    }
    return lower * upper;
}

inline GradedMap randomBasisChange(std::mt19937& rng, const GradedPtr& a)
{
    std::vector<QMatrix> change;
    for (HomId h = 0; h < a->homCount(); ++h)
        change.push_back(randomInvertible(rng, a->dim(h)));
    return changeBasis(a, change);
}

/**
 * Random algebra among a few fixtures.
 */
inline GradedPtr randomAlgebra(std::mt19937& rng)
{
    switch (rng() % 4)
    {
        case 0:
            return rationalsGraded();
        case 1:
            return dualNumbers();
        case 2:
            return groupAlgebraZ2();
        default:
            return upperTriangular();
    }
}

/**
 * Random graded category: free, inflated or algebra-tensored over a
 * random small category, optionally with a random change of basis.
 */
inline GradedPtr randomGraded(std::mt19937& rng)
{
    CatPtr u = rng() % 4 == 0 ? randomMonoid(rng) : randomPoset(rng, 1 + rng() % 3);
    GradedPtr a;
    switch (rng() % 3)
    {
        case 0:
            a = freeGraded(u);
            break;
        case 1:
        {
            std::vector<std::size_t> sizes;
            for (ObjId x = 0; x < u->objectCount(); ++x)
                sizes.push_back(rng() % 3);
            a = inflated(u, sizes);
            break;
        }
        default:
            a = tensorWithAlgebra(u, randomAlgebra(rng));
    }
    if (rng() % 2)
        a = randomBasisChange(rng, a).category;
    return a;
}

}   // namespace mgc::gen

#endif
