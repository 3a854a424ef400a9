/**
 * Bimodules: validation, tensor products, Hom bimodules, restriction,
 * support splitting and arrow categories.
 */

#include <catch_amalgamated.hpp>
#include <set>
#include "mgc/bimodule.hpp"
#include "support/generators.hpp"

using namespace mgc;

namespace {

SparseVector e(std::size_t i)
{
    return {{i, Rational(1)}};
}

HomId homOfSpace(const Bimodule& one, SpaceId p)
{
    const Bimodule::Space& sp = one.space(p);
    return one.left()->homId(sp.element, sp.right, sp.left);
}

/**
 * Checks that multiplication M ⊗ 1_𝔟 → M (oneOnRight) or 1_𝔞 ⊗ M → M is
 * an isomorphism space by space.
 */
void checkUnitIso(const Bimodule& m, bool oneOnRight)
{
    Bimodule one = identityBimodule(oneOnRight ? m.right() : m.left());
    TensorProduct t = oneOnRight ? tensor(m, one) : tensor(one, m);
    CHECK(t.module.totalDim() == m.totalDim());
    std::set<SpaceId> hit;
    for (SpaceId p = 0; p < t.module.spaceCount(); ++p)
    {
        if (t.module.dim(p) == 0)
            continue;
        std::optional<SpaceId> target;
        std::vector<QVector> columns;
        for (std::size_t q : t.quotients[p].basisCoordinates())
        {
            for (const auto& sm : t.summands[p])
            {
                std::size_t firstDim = oneOnRight ? m.dim(sm.first) : one.dim(sm.first);
                if (q < sm.offset || q >= sm.offset + firstDim * sm.width)
                    continue;
                std::size_t a = (q - sm.offset) / sm.width;
                std::size_t b = (q - sm.offset) % sm.width;
                SpaceId tgt;
                SparseVector img;
                if (oneOnRight)
                {
                    HomId hb = homOfSpace(one, sm.second);
                    tgt = m.rightTarget(sm.first, hb);
                    img = m.actRight(sm.first, hb, e(a), e(b));
                }
                else
                {
                    HomId ha = homOfSpace(one, sm.first);
                    tgt = m.leftTarget(ha, sm.second);
                    img = m.actLeft(ha, sm.second, e(a), e(b));
                }
                if (target)
                    CHECK(*target == tgt);
                target = tgt;
                columns.push_back(toDense(img, m.dim(tgt)));
                break;
            }
        }
        REQUIRE(target);
        CHECK(hit.insert(*target).second);
        CHECK(isInvertible(QMatrix::fromColumns(m.dim(*target), columns)));
    }
}

/**
 * 𝔞-bimodules over 1_𝒰 built from 1_𝔞: the identity and its part
 * supported on a random ideal.
 */
Bimodule randomIdentityLike(std::mt19937& rng, const GradedPtr& a)
{
    Bimodule one = identityBimodule(a);
    if (rng() % 2)
        return one;
    return supportedOn(one, gen::randomDecomposition(rng, a->base()).ideal);
}

GradedFunctor unitFunctor()
{
    GradedPtr q = rationalsGraded();
    GradedPtr l = dualNumbersGraded();
    QMatrix unit(2, 1);
    unit.set(0, 0, Rational(1));
    return GradedFunctor::make(q, l, Functor::make(q->base(), l->base(), {0}, {0}), {0}, {unit});
}

}   // namespace

TEST_CASE("bimodule validation", "[bimod]")
{
    Bimodule one = identityBimodule(gen::dualNumbers());
    CHECK(one.spaceCount() == 1);
    CHECK(one.dim(0) == 2);
    CHECK(bimoduleViolations(one).empty());

    std::mt19937 rng(5);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Bimodule m = identityBimodule(a);
        CHECK(m.overIdentity());
        for (SpaceId p = 0; p < m.spaceCount(); ++p)
            CHECK(m.dim(p) == a->dim(homOfSpace(m, p)));
    }

    GradedPtr q = rationalsGraded();
    BimoduleBuilder bad(q, q, SetBifunctor::identity(q->base()));
    bad.setBasis(0, {"m"});
    bad.setLeft(0, 0, 0, 0, {{0, Rational(2)}});
    bad.setRight(0, 0, 0, 0, e(0));
    try
    {
        bad.build();
        FAIL("a non-unital action was accepted");
    }
    catch (const Error& err)
    {
        CHECK(err.code() == "BadUnit");
    }

    GradedPtr l = dualNumbersGraded();
    BimoduleBuilder twisted(l, l, SetBifunctor::identity(l->base()));
    twisted.setBasis(0, {"m"});
    twisted.setLeft(0, 0, 0, 0, e(0));
    twisted.setRight(0, 0, 0, 0, e(0));
    twisted.setLeft(0, 1, 0, 0, e(0));   // x·m = m breaks x·x = 0
    try
    {
        twisted.build();
        FAIL("a non-associative action was accepted");
    }
    catch (const Error& err)
    {
        CHECK(err.code() == "NonAssociative");
    }
}

TEST_CASE("tensor products", "[bimod]")
{
    Bimodule oneQ = identityBimodule(rationalsGraded());
    CHECK(tensor(oneQ, oneQ).module.totalDim() == 1);
    Bimodule oneL = identityBimodule(dualNumbersGraded());
    TensorProduct ll = tensor(oneL, oneL);
    REQUIRE(ll.module.spaceCount() == 1);
    CHECK(ll.module.dim(0) == 2);

    CHECK_THROWS_AS(tensor(oneQ, oneL), Error);

    std::mt19937 rng(9);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Bimodule m = randomIdentityLike(rng, a);
        checkUnitIso(m, true);
        checkUnitIso(m, false);

        Subcategory sub = gen::randomSubcategory(rng, a->base());
        GradedMap r = restrictGraded(a, embedSubcategory(sub).inclusion);
        Bimodule lower = lowerBimodule(r.functor);
        Bimodule upper = upperBimodule(r.functor);
        checkUnitIso(lower, true);
        checkUnitIso(lower, false);
        checkUnitIso(upper, true);
        checkUnitIso(upper, false);

        // (P ⊗ M) ⊗ N and P ⊗ (M ⊗ N) over the same pair of objects.
        Bimodule p = randomIdentityLike(rng, a);
        TensorProduct left = tensor(tensor(p, m).module, lower);
        TensorProduct right = tensor(p, tensor(m, lower).module);
        CHECK(left.module.totalDim() == right.module.totalDim());
        std::map<std::pair<ObjId, ObjId>, std::size_t> dimsLeft;
        std::map<std::pair<ObjId, ObjId>, std::size_t> dimsRight;
        for (SpaceId s = 0; s < left.module.spaceCount(); ++s)
            dimsLeft[{left.module.space(s).right, left.module.space(s).left}] += left.module.dim(s);
        for (SpaceId s = 0; s < right.module.spaceCount(); ++s)
            dimsRight[{right.module.space(s).right, right.module.space(s).left}] += right.module.dim(s);
        CHECK(dimsLeft == dimsRight);
    }
}

TEST_CASE("Hom bimodules", "[bimod]")
{
    Bimodule oneQ = identityBimodule(rationalsGraded());
    CHECK(homBimodule(oneQ, oneQ).module.totalDim() == 1);

    Bimodule regularRight = upperBimodule(unitFunctor());
    CHECK(regularRight.totalDim() == 2);
    CHECK(homBimodule(regularRight, regularRight).module.totalDim() == 2);
    Bimodule regularLeft = lowerBimodule(unitFunctor());
    CHECK(homOpBimodule(regularLeft, regularLeft).module.totalDim() == 2);

    std::mt19937 rng(13);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Bimodule one = identityBimodule(a);
        HomBimodule endo = homBimodule(one, one);
        auto action = actionMap(one, endo);
        for (HomId h = 0; h < a->homCount(); ++h)
            CHECK(isInvertible(action[h]));
        HomBimodule endoOp = homOpBimodule(one, one);
        CHECK(endoOp.module.totalDim() == one.totalDim());
    }
}

TEST_CASE("tensor-Hom adjunction dimensions", "[bimod]")
{
    std::mt19937 rng(17);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Bimodule x = randomIdentityLike(rng, a);
        Bimodule m = randomIdentityLike(rng, a);
        Bimodule n = randomIdentityLike(rng, a);
        TensorProduct xm = tensor(x, m);
        const FinCat& u = *a->base();
        std::vector<std::size_t> toComposite;
        for (std::size_t c = 0; c < xm.composite.composite.size(); ++c)
        {
            auto [f, g] = xm.composite.representative[c];
            toComposite.push_back(u.compose(f, g));
        }
        std::vector<std::size_t> identity(u.morphismCount());
        for (MorId k = 0; k < u.morphismCount(); ++k)
            identity[k] = k;
        std::size_t lhs = morphismSpace(xm.module, n, toComposite).size();
        std::size_t rhs = morphismSpace(x, homBimodule(m, n).module, identity).size();
        CHECK(lhs == rhs);
    }
}

TEST_CASE("restriction of bimodules", "[bimod]")
{
    std::mt19937 rng(19);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Bimodule one = identityBimodule(a);
        CHECK_FALSE(bimoduleDifference(restrictBimodule(GradedFunctor::identity(a), one), one));

        Subcategory sub = gen::randomSubcategory(rng, a->base());
        GradedMap r = restrictGraded(a, embedSubcategory(sub).inclusion);
        auto diff = bimoduleDifference(restrictBimodule(r.functor, one), identityBimodule(r.category));
        INFO(diff.value_or(""));
        CHECK_FALSE(diff);

        GradedMap changed = changeBasis(a, [&] {
            std::vector<QMatrix> change;
            for (HomId h = 0; h < a->homCount(); ++h)
                change.push_back(a->dim(h) ? gen::randomInvertible(rng, a->dim(h)) : QMatrix());
            return change;
        }());
        Bimodule pulled = restrictBimodule(changed.functor, one);
        Bimodule own = identityBimodule(changed.category);
        std::vector<std::size_t> identity(a->base()->morphismCount());
        for (MorId k = 0; k < identity.size(); ++k)
            identity[k] = k;
        CHECK(pulled.totalDim() == own.totalDim());
        // The functor's hom maps are a bimodule isomorphism 1_𝔟 → F*1_𝔞.
        auto maps = morphismSpace(own, pulled, identity);
        CHECK(maps.size() >= (own.totalDim() > 0 ? 1u : 0u));
    }
}

TEST_CASE("support splitting", "[bimod]")
{
    std::mt19937 rng(23);
    for (int trial = 0; trial < 20; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Bimodule one = identityBimodule(a);
        gen::Decomposition d = gen::randomDecomposition(rng, a->base());
        SupportSplit split = supportSplit(one, d.ideal, d.complement);
        CHECK(split.supported.totalDim() + split.quotient.totalDim() == one.totalDim());
        for (SpaceId p = 0; p < one.spaceCount(); ++p)
        {
            bool inIdeal = d.ideal[one.space(p).element] != 0;
            CHECK(split.supported.dim(p) == (inIdeal ? one.dim(p) : 0));
            CHECK(split.quotient.dim(p) == (inIdeal ? 0 : one.dim(p)));
            CHECK(isExactSequence({split.inclusion[p], split.projection[p]}, true, true).exact);
        }
    }

    CatPtr a2 = gen::aTwo();
    Bimodule one = identityBimodule(freeGraded(a2));
    std::vector<char> none(a2->morphismCount(), 0);
    Subcategory all{a2, {1, 1}, {1, 1, 1}};
    SupportSplit trivial = supportSplit(one, none, all);
    CHECK(trivial.supported.totalDim() == 0);
    CHECK_FALSE(bimoduleDifference(trivial.quotient, one));

    std::vector<char> bad = none;
    bad[*a2->findMorphism("u")] = 1;
    try
    {
        supportSplit(one, bad, all);
        FAIL("an overlapping decomposition was accepted");
    }
    catch (const Error& err)
    {
        CHECK(err.code() == "NotADecomposition");
    }
}

TEST_CASE("linear arrow categories", "[bimod]")
{
    ArrowGraded t2 = arrowCategory(identityBimodule(rationalsGraded()));
    const GradedCat& c = *t2.category;
    CHECK(c.objectCount() == 2);
    CHECK(c.homCount() == 3);
    for (HomId h = 0; h < c.homCount(); ++h)
        CHECK(c.dim(h) == 1);
    CHECK(c.base()->morphismCount() == 3);

    std::mt19937 rng(29);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        Subcategory sub = gen::randomSubcategory(rng, a->base());
        GradedMap r = restrictGraded(a, embedSubcategory(sub).inclusion);
        Bimodule m = rng() % 2 ? lowerBimodule(r.functor) : randomIdentityLike(rng, a);
        ArrowGraded arrow = arrowCategory(m);
        auto below = restrictGraded(arrow.category, arrow.base.fromRight);
        auto above = restrictGraded(arrow.category, arrow.base.fromLeft);
        CHECK_FALSE(structuralDifference(*below.category, *m.right()));
        CHECK_FALSE(structuralDifference(*above.category, *m.left()));
        CHECK(arrow.fromRight.isCartesian());
        CHECK(arrow.fromLeft.isCartesian());

        // (1_𝔠) supported on the cross morphisms has the spaces of M.
        Bimodule cross = supportedOn(identityBimodule(arrow.category), arrow.crossIdeal);
        CHECK(cross.totalDim() == m.totalDim());
        for (SpaceId p = 0; p < m.spaceCount(); ++p)
        {
            const Bimodule::Space& sp = m.space(p);
            SpaceId q = cross.spaceId(arrow.base.crossMorphism[sp.element], sp.right, m.right()->objectCount() + sp.left);
            REQUIRE(cross.dim(q) == m.dim(p));
            for (HomId h = 0; h < m.left()->homCount(); ++h)
            {
                SpaceId t = m.leftTarget(h, p);
                if (t == kNone)
                    continue;
                CHECK(cross.leftConstants(arrow.fromLeft.onHom(h), q) == m.leftConstants(h, p));
            }
        }
    }
}
