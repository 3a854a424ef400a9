/**
 * Pseudofunctors and Grothendieck constructions: arrow categories as
 * Grothendieck constructions over A2, coherence failures, base change,
 * chain unrolling, the C* and chain covers and the comparison check.
 */

#include <catch_amalgamated.hpp>
#include <set>
#include "mgc/groth.hpp"
#include "support/generators.hpp"

using namespace mgc;

namespace {

const SignConvention kConventions[] = {SignConvention::Standard, SignConvention::Flipped};

/**
 * The full subcategory on the base objects named in keep.
 */
GradedMap shrink(const GradedPtr& a, const std::set<std::string>& keep)
{
    std::vector<ObjId> objects;
    for (ObjId x = 0; x < a->base()->objectCount(); ++x)
        if (keep.count(a->base()->objectName(x)))
            objects.push_back(x);
    return restrictGraded(a, embedSubcategory(fullSubcategory(a->base(), objects)).inclusion);
}

/**
 * Functors along a poset whose covering relations are given by steps;
 * every other functor is the composite along a path of steps.
 */
FunctorialDiagram posetDiagram(const CatPtr& p, const std::vector<GradedPtr>& fibers,
                               const std::map<std::pair<ObjId, ObjId>, GradedFunctor>& steps)
{
    FunctorialDiagram d;
    d.base = p;
    d.fibers = fibers;
    std::vector<std::optional<GradedFunctor> > functors(p->morphismCount());
    for (MorId m = 0; m < p->morphismCount(); ++m)
        if (p->isIdentity(m))
            functors[m] = GradedFunctor::identity(fibers[p->source(m)]);
    for (bool changed = true; changed;)
    {
        changed = false;
        for (MorId m = 0; m < p->morphismCount(); ++m)
        {
            if (functors[m])
                continue;
            for (const auto& [edge, f] : steps)
            {
                if (edge.first != p->source(m))
                    continue;
                if (edge.second == p->target(m))
                {
                    functors[m] = f;
                    break;
                }
                MorId rest = p->hom(edge.second, p->target(m)).empty() ? kNone : p->hom(edge.second, p->target(m))[0];
                if (rest != kNone && functors[rest])
                {
                    functors[m] = GradedFunctor::compose(*functors[rest], f);
                    break;
                }
            }
            changed = changed || functors[m].has_value();
        }
    }
    for (const auto& f : functors)
        d.functors.push_back(*f);
    return d;
}

/**
 * A chain of restrictions b ⊃ ... ⊃ b|keep[0] over chainCategory(n).
 */
FunctorialDiagram restrictionChain(const GradedPtr& b, const std::vector<std::set<std::string> >& keep)
{
    std::size_t n = keep.size();
    CatPtr c = chainCategory(n);
    std::vector<GradedPtr> fibers(n + 1);
    std::map<std::pair<ObjId, ObjId>, GradedFunctor> steps;
    fibers[n] = b;
    for (std::size_t k = n; k-- > 0;)
    {
        GradedMap r = shrink(fibers[k + 1], keep[k]);
        fibers[k] = r.category;
        steps.emplace(std::make_pair(ObjId(k), ObjId(k + 1)), r.functor);
    }
    return posetDiagram(c, fibers, steps);
}

PseudoFunctor edgeDiagram(const Bimodule& m)
{
    PseudoFunctor p;
    p.base = gen::aTwo();
    p.fibers = {m.right(), m.left()};
    p.edges = {identityBimodule(m.right()), identityBimodule(m.left()), m};
    return p;
}

std::vector<std::size_t> hh(const GradedPtr& a, std::size_t top)
{
    return hhDims(buildComplex(a, top)).dims;
}

}   // namespace

TEST_CASE("a single edge gives the arrow category", "[groth]")
{
    std::vector<Bimodule> edges = {identityBimodule(rationalsGraded()), identityBimodule(gen::dualNumbers()),
                                   identityBimodule(gen::upperTriangular())};
    GradedMap r = shrink(gen::inflated(gen::vPoset(), {1, 2, 1}), {"s", "t0"});
    edges.push_back(lowerBimodule(r.functor));
    edges.push_back(upperBimodule(r.functor));
    for (const Bimodule& m : edges)
    {
        Grothendieck g = grothendieck(edgeDiagram(m));
        ArrowGraded arrow = arrowCategory(m);
        INFO(structuralDifference(*g.category, *arrow.category).value_or("same"));
        CHECK_FALSE(structuralDifference(*g.category, *arrow.category));
    }
    std::vector<std::size_t> t2 = hh(grothendieck(edgeDiagram(edges[0])).category, 2);
    CHECK(t2 == std::vector<std::size_t>{1, 0, 0});
}

TEST_CASE("constant pseudofunctors", "[groth]")
{
    for (const CatPtr& c : {gen::aTwo(), gen::vPoset(), gen::grid(), chainCategory(3)})
    {
        Grothendieck g = grothendieck(constantPseudofunctor(c, rationalsGraded()));
        CHECK_FALSE(structuralDifference(*g.category, *freeGraded(c)));
        Grothendieck h = grothendieck(constantPseudofunctor(c, gen::dualNumbers()));
        CHECK_FALSE(structuralDifference(*h.category, *gen::tensorWithAlgebra(c, gen::dualNumbers())));
    }
}

TEST_CASE("broken coherence is rejected", "[groth]")
{
    GradedPtr b = gen::inflated(chainCategory(2), {1, 2, 1});
    FunctorialDiagram d = restrictionChain(b, {{"0"}, {"0", "1"}});
    PseudoFunctor p = toPseudofunctor(d);
    REQUIRE_NOTHROW(validatePseudofunctor(p));

    PseudoFunctor zeroed = p;
    for (auto& [key, coh] : zeroed.coherence)
        for (auto& [spaces, values] : coh.products)
            for (SparseVector& v : values)
                v.clear();
    CHECK_THROWS_WITH(validatePseudofunctor(zeroed), Catch::Matchers::StartsWith("CoherenceFailed"));

    FunctorialDiagram longer = restrictionChain(gen::inflated(chainCategory(3), {1, 1, 1, 1}),
                                                {{"0"}, {"0", "1"}, {"0", "1", "2"}});
    PseudoFunctor q = toPseudofunctor(longer);
    REQUIRE_NOTHROW(validatePseudofunctor(q));
    const FinCat& c = *q.base;
    MorId inner = c.hom(0, 1)[0];
    MorId outer = c.hom(1, 2)[0];
    for (auto& [spaces, values] : q.coherence.at({outer, inner}).products)
        for (SparseVector& v : values)
            for (auto& entry : v)
                entry.second *= 2;
    try
    {
        validatePseudofunctor(q);
        FAIL("accepted a non-associative coherence");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == "CoherenceFailed");
        CHECK(std::string(e.what()).find("(2<3, 1<2, 0<1)") != std::string::npos);
    }
}

TEST_CASE("non-strict diagrams are rejected", "[groth]")
{
    GradedPtr b = gen::inflated(chainCategory(2), {2, 1, 1});
    FunctorialDiagram d = restrictionChain(b, {{"0"}, {"0", "1"}});
    const GradedPtr& a = d.fibers[0];
    REQUIRE(a->objectCount() == 2);
    std::vector<QMatrix> maps;
    for (HomId h = 0; h < a->homCount(); ++h)
        maps.push_back(QMatrix::identity(a->dim(h)));
    GradedFunctor swap = GradedFunctor::make(a, a, Functor::identity(a->base()), {1, 0}, maps);
    MorId longest = d.base->hom(0, 2)[0];
    d.functors[longest] = GradedFunctor::compose(d.functors[longest], swap);
    CHECK_THROWS_WITH(toPseudofunctor(d), Catch::Matchers::StartsWith("CoherenceFailed"));
}

TEST_CASE("base change", "[groth]")
{
    GradedPtr b = gen::inflated(gen::grid(), {1, 2, 1, 1});
    GradedMap top = shrink(b, {"b", "l", "r"});
    GradedMap low = shrink(top.category, {"b"});
    FunctorialDiagram d = posetDiagram(gen::grid(), {low.category, top.category, top.category, b},
                                       {{{0, 1}, low.functor}, {{0, 2}, low.functor},
                                        {{1, 3}, top.functor}, {{2, 3}, top.functor}});
    Grothendieck g = grothendieck(toPseudofunctor(d));

    BaseChange same = baseChange(g, Functor::identity(g.diagram.base));
    CHECK_FALSE(structuralDifference(*same.total.category, *g.category));
    CHECK(same.functor.isCartesian());

    for (const Subcategory& piece : chainCover(g.diagram.base).pieces)
    {
        BaseChange bc = baseChange(g, embedSubcategory(piece).inclusion);
        CHECK(bc.functor.isCartesian());
        CHECK(nerveInjective(bc.functor.base(), 1));
    }
    for (ObjId x = 0; x < g.diagram.base->objectCount(); ++x)
    {
        Slice s = sliceCategory(g.diagram.base, x);
        BaseChange bc = baseChange(g, s.forget);
        CHECK(bc.functor.isCartesian());
        GradedFunctor incl = fiberInclusion(bc.total, s.terminal);
        CHECK(incl.isSubcartesian());
    }
}

TEST_CASE("induced covers", "[groth]")
{
    GradedPtr b = gen::inflated(gen::vPoset(), {1, 2, 1});
    GradedMap r0 = shrink(b, {"s", "t0"});
    GradedMap rs = shrink(r0.category, {"s"});
    FunctorialDiagram d = posetDiagram(gen::vPoset(), {rs.category, r0.category, r0.category},
                                       {{{0, 1}, rs.functor}, {{0, 2}, rs.functor}});
    Grothendieck g = grothendieck(toPseudofunctor(d));
    std::vector<Functor> baseFamily;
    std::vector<Functor> totalFamily;
    for (const Subcategory& piece : chainCover(g.diagram.base).pieces)
    {
        BaseChange bc = baseChange(g, embedSubcategory(piece).inclusion);
        baseFamily.push_back(embedSubcategory(piece).inclusion);
        totalFamily.push_back(bc.functor.base());
    }
    CHECK(isNCover(baseFamily, std::nullopt).isCover);
    CHECK(isNCover(totalFamily, std::nullopt).isCover);
}

TEST_CASE("Grothendieck constructions over chains unroll into arrow categories", "[groth]")
{
    std::vector<Grothendieck> cases;
    GradedPtr b = gen::inflated(chainCategory(3), {1, 2, 1, 2});
    cases.push_back(grothendieck(toPseudofunctor(restrictionChain(b, {{"0", "1"}}))));
    cases.push_back(grothendieck(toPseudofunctor(restrictionChain(b, {{"0"}, {"0", "1", "2"}}))));
    cases.push_back(grothendieck(toPseudofunctor(restrictionChain(b, {{"0"}, {"0", "1"}, {"0", "1", "2"}}))));
    for (std::size_t n = 1; n <= 3; ++n)
        cases.push_back(grothendieck(constantPseudofunctor(chainCategory(n), gen::upperTriangular())));
    for (const Grothendieck& g : cases)
    {
        std::vector<ArrowDecomposition> steps = unrollChain(g);
        REQUIRE(steps.size() + 1 == g.diagram.base->objectCount());
        for (const ArrowDecomposition& s : steps)
            CHECK(s.isomorphism);
        CHECK(hh(steps.front().arrow.category, 2) == hh(g.category, 2));
    }
    CHECK_THROWS_WITH(unrollChain(grothendieck(constantPseudofunctor(gen::vPoset(), rationalsGraded()))),
                      Catch::Matchers::StartsWith("NotAChain"));
}

TEST_CASE("the C* cover of the V-poset", "[groth]")
{
    GradedPtr b = gen::inflated(gen::vPoset(), {1, 2, 1});
    GradedMap r = shrink(b, {"s"});
    FunctorialDiagram d = posetDiagram(gen::vPoset(), {r.category, b, b}, {{{0, 1}, r.functor}, {{0, 2}, r.functor}});
    PseudoFunctor p = toPseudofunctor(d);
    for (SignConvention conv : kConventions)
    {
        CStarReport rep = cstarDiagram(p, {1, 2}, 3, conv);
        CHECK(rep.report.exact());
        REQUIRE(rep.products.count({0, 1}));
        CHECK(rep.products.at({0, 1}).product == 0);
        CHECK(rep.star.category->objectCount() == 4);
    }
    CStarReport single = cstarDiagram(constantPseudofunctor(gen::grid(), gen::dualNumbers()), {3}, 2);
    CHECK(single.report.exact());
    CHECK_THROWS_WITH(cstarDiagram(p, {1}, 2), Catch::Matchers::StartsWith("NoAnchorMap"));
    CHECK_THROWS_WITH(cstarDiagram(constantPseudofunctor(posetCategory({"a", "b"}, {}), rationalsGraded()), {0, 1}, 2),
                      Catch::Matchers::StartsWith("MissingProduct"));
}

TEST_CASE("chain covers and Mayer-Vietoris", "[groth]")
{
    for (SignConvention conv : kConventions)
    {
        ChainCoverReport v = chainCoverMv(constantPseudofunctor(gen::vPoset(), rationalsGraded()), 3, conv);
        CHECK(v.sheaf.exact());
        REQUIRE(v.mayerVietoris);
        CHECK(v.mayerVietoris->exact());
        ChainCoverReport g = chainCoverMv(constantPseudofunctor(gen::grid(), gen::groupAlgebraZ2()), 2, conv);
        CHECK(g.sheaf.exact());
        REQUIRE(g.mayerVietoris);
        CHECK(g.mayerVietoris->exact());
    }
}

TEST_CASE("comparison of fibers with Grothendieck restrictions", "[groth]")
{
    GradedPtr b = gen::inflated(chainCategory(2), {1, 2, 1});
    std::vector<FunctorialDiagram> cases;
    cases.push_back(restrictionChain(b, {{"0", "1"}}));
    cases.push_back(restrictionChain(b, {{"0"}, {"0", "1"}}));
    {
        GradedMap r = shrink(gen::inflated(gen::vPoset(), {1, 1, 2}), {"s", "t1"});
        cases.push_back(posetDiagram(gen::vPoset(), {r.category, r.category, r.category},
                                     {{{0, 1}, GradedFunctor::identity(r.category)},
                                      {{0, 2}, GradedFunctor::identity(r.category)}}));
    }
    for (const FunctorialDiagram& d : cases)
        for (SignConvention conv : kConventions)
        {
            ComparisonReport rep = comparisonCheck(d, 3, conv);
            CHECK(rep.holds());
            for (const auto& degrees : rep.objects)
                for (const ComparisonDegree& cd : degrees)
                    CHECK(cd.total == cd.fiber);
        }
    FunctorialDiagram notDelta;
    CategoryBuilder iso;
    iso.addObject("a", "ida");
    iso.addObject("b", "idb");
    MorId f = iso.addMorphism("f", 0, 1);
    MorId g = iso.addMorphism("g", 1, 0);
    iso.setComposite(g, f, 0);
    iso.setComposite(f, g, 1);
    notDelta.base = iso.build();
    CHECK_THROWS_WITH(comparisonCheck(notDelta, 2), Catch::Matchers::StartsWith("NotADelta"));
}

TEST_CASE("random restriction chains", "[groth][property]")
{
    std::mt19937 rng(20261019);
    for (int round = 0; round < 12; ++round)
    {
        std::size_t n = 1 + rng() % 3;
        std::vector<std::size_t> sizes;
        for (std::size_t k = 0; k <= n; ++k)
            sizes.push_back(1 + rng() % 2);
        GradedPtr b = gen::inflated(chainCategory(n), sizes);
        std::vector<std::set<std::string> > keep(n);
        std::set<std::string> current;
        for (std::size_t k = 0; k <= n; ++k)
            current.insert(std::to_string(k));
        for (std::size_t k = n; k-- > 0;)
        {
            if (current.size() > 1)
            {
                auto it = current.begin();
                std::advance(it, rng() % current.size());
                current.erase(it);
            }
            keep[k] = current;
        }
        FunctorialDiagram d = restrictionChain(b, keep);
        Grothendieck g = grothendieck(toPseudofunctor(d));
        for (const ArrowDecomposition& s : unrollChain(g))
            CHECK(s.isomorphism);
        CHECK(comparisonCheck(d, 2).holds());
    }
}
