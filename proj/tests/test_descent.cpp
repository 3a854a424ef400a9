/**
 * Descent data: restriction followed by glueing, cocycle failures and
 * non-covers.
 */

#include <catch_amalgamated.hpp>
#include "mgc/descent.hpp"
#include "support/generators.hpp"

using namespace mgc;

namespace {

std::vector<Functor> chainCoverFunctors(const CatPtr& p)
{
    std::vector<Functor> out;
    for (const Subcategory& s : chainCover(p).pieces)
        out.push_back(embedSubcategory(s).inclusion);
    return out;
}

void checkRoundTrip(const GradedPtr& a, const std::vector<Functor>& cover)
{
    DescentDatum d = descentFromRestriction(a, cover);
    CHECK_FALSE(checkCocycle(d));
    GlueResult g = glueDescent(d);
    CHECK(g.cover.isCover);
    auto diff = structuralDifference(*g.glued, *a);
    INFO(diff.value_or(""));
    CHECK_FALSE(diff);
    REQUIRE(g.comparisons.size() == cover.size());
    for (const GradedFunctor& f : g.comparisons)
        CHECK(f.isCartesian());
}

/**
 * Datum over A2 with cover {id, id} whose ρ_01 scales the hom over u by
 * the given factor and ρ_10 by its inverse or by 1.
 */
DescentDatum scaledDatum(const Rational& factor, bool consistent)
{
    CatPtr a2 = gen::aTwo();
    GradedPtr ka2 = freeGraded(a2);
    Functor id = Functor::identity(a2);
    DescentDatum d = descentFromRestriction(ka2, {id, id});
    for (auto [key, inverseFactor] : {std::make_pair(std::make_pair(std::size_t(0), std::size_t(1)), false),
                                      std::make_pair(std::make_pair(std::size_t(1), std::size_t(0)), true)})
    {
        const Overlap& ov = d.overlaps.at(key);
        const GradedFunctor& rho = d.rho.at(key);
        const GradedCat& left = *ov.left.category;
        std::vector<QMatrix> maps;
        for (HomId h = 0; h < left.homCount(); ++h)
        {
            QMatrix m = rho.homMap(h);
            if (!ov.pullback.category->isIdentity(left.homMorphism(h)))
            {
                Rational s = inverseFactor ? (consistent ? Rational(1) / factor : Rational(1)) : factor;
                m = m.scaled(s);
            }
            maps.push_back(m);
        }
        d.rho[key] = GradedFunctor::make(rho.source(), rho.target(), rho.base(), rho.objectMap(), maps);
    }
    return d;
}

}   // namespace

TEST_CASE("restriction then glueing recovers the category", "[descent]")
{
    checkRoundTrip(gen::inflated(gen::vPoset(), {1, 2, 1}), chainCoverFunctors(gen::vPoset()));
    checkRoundTrip(freeGraded(gen::grid()), chainCoverFunctors(gen::grid()));
    checkRoundTrip(gen::tensorWithAlgebra(gen::vPoset(), gen::dualNumbers()), chainCoverFunctors(gen::vPoset()));
    checkRoundTrip(gen::inflated(gen::grid(), {2, 1, 0, 1}), chainCoverFunctors(gen::grid()));

    std::mt19937 rng(71);
    for (int trial = 0; trial < 25; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        CatPtr u = a->base();
        std::vector<Functor> cover = {Functor::identity(u)};
        for (int k = 0; k < 2; ++k)
            cover.push_back(embedSubcategory(gen::randomSubcategory(rng, u)).inclusion);
        std::shuffle(cover.begin(), cover.end(), rng);
        checkRoundTrip(a, cover);
    }
}

TEST_CASE("consistent twisted datum glues", "[descent]")
{
    DescentDatum d = scaledDatum(Rational(3), true);
    CHECK_FALSE(checkCocycle(d));
    GlueResult g = glueDescent(d);
    CHECK_FALSE(structuralDifference(*g.glued, *freeGraded(gen::aTwo())));
    for (const GradedFunctor& f : g.comparisons)
        CHECK(f.isCartesian());
}

TEST_CASE("corrupted cocycle is rejected with a triple", "[descent]")
{
    DescentDatum d = scaledDatum(Rational(2), false);
    auto bad = checkCocycle(d);
    REQUIRE(bad);
    CHECK(bad->i == 0);
    CHECK(bad->j == 1);
    CHECK(bad->k == 0);
    try
    {
        glueDescent(d);
        FAIL("glueing accepted a corrupted cocycle");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == "CocycleViolated");
        CHECK(e.detail().rfind("CocycleViolated(0, 1, 0)", 0) == 0);
    }
}

TEST_CASE("glueing needs a cover", "[descent]")
{
    CatPtr a2 = gen::aTwo();
    GradedPtr ka2 = freeGraded(a2);
    std::vector<Functor> cover = {embedSubcategory(fullSubcategory(a2, {0})).inclusion,
                                  embedSubcategory(fullSubcategory(a2, {1})).inclusion};
    DescentDatum d = descentFromRestriction(ka2, cover);
    try
    {
        glueDescent(d);
        FAIL("glueing accepted a non-cover");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == "NotACover");
    }
}
