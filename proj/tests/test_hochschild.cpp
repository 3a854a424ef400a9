/**
 * Hochschild complexes: golden cohomology, d² = 0, agreement with
 * independent dense computations, restriction maps and the exact
 * sequences of supports, covers and arrow categories.
 */

#include <catch_amalgamated.hpp>
#include "mgc/hochschild.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace mgc;

namespace {

const SignConvention kConventions[] = {SignConvention::Standard, SignConvention::Flipped};

GradedPtr tTwo()
{
    return arrowCategory(identityBimodule(rationalsGraded())).category;
}

CatPtr threeOpens()
{
    return posetCategory({"U1", "U2", "U0"}, {{"U1", "U0"}, {"U2", "U0"}});
}

std::vector<std::size_t> hh(const GradedPtr& a, std::size_t top, SignConvention c = SignConvention::Standard)
{
    return hhDims(buildComplex(a, top, c)).dims;
}

GradedFunctor inclusionOf(const GradedPtr& a, const Subcategory& s)
{
    return restrictGraded(a, embedSubcategory(s).inclusion).functor;
}

std::vector<GradedFunctor> chainCoverOf(const GradedPtr& a)
{
    std::vector<GradedFunctor> out;
    for (const Subcategory& s : chainCover(a->base()).pieces)
        out.push_back(inclusionOf(a, s));
    return out;
}

Subcategory discretePart(const CatPtr& c)
{
    std::vector<ObjId> all;
    for (ObjId x = 0; x < c->objectCount(); ++x)
        all.push_back(x);
    return generatedSubcategory(c, all, {});
}

Subcategory everything(const CatPtr& c)
{
    Subcategory s;
    s.ambient = c;
    s.objects.assign(c->objectCount(), 1);
    s.morphisms.assign(c->morphismCount(), 1);
    return s;
}

void requireExact(const ExactnessReport& r)
{
    for (const DegreeVerdict& d : r.degrees)
    {
        INFO(r.label << " degree " << d.degree << ": " << d.verdict.reason);
        CHECK(d.verdict.exact);
    }
    for (const std::string& f : r.failures)
        FAIL_CHECK(r.label << ": " << f);
    if (r.les)
    {
        INFO(r.label << " long sequence position " << r.les->verdict.failingPosition << ": " << r.les->verdict.reason);
        CHECK(r.les->verdict.exact);
    }
}

}   // namespace

TEST_CASE("golden Hochschild dimensions", "[hochschild]")
{
    HochschildComplex q = buildComplex(rationalsGraded(), 3);
    for (std::size_t n = 0; n <= 4; ++n)
        CHECK(q.dim(n) == 1);
    CHECK(hhDims(q).dims == std::vector<std::size_t>{1, 0, 0, 0});
    CHECK(formatDims(hhDims(q)) == "1 0 0 0*");

    HochschildComplex lambda = buildComplex(gen::dualNumbers(), 2);
    for (std::size_t n = 0; n <= 3; ++n)
        CHECK(lambda.dim(n) == (std::size_t(2) << n));
    CHECK(hhDims(lambda).dims == std::vector<std::size_t>{2, 1, 1});

    CHECK(hh(tTwo(), 2) == std::vector<std::size_t>{1, 0, 0});
    CHECK(hh(freeGraded(gen::vPoset()), 3) == std::vector<std::size_t>{1, 0, 0, 0});

    for (const GradedPtr& a : {rationalsGraded(), gen::dualNumbers(), tTwo(), freeGraded(gen::vPoset())})
    {
        HochschildComplex c = buildComplex(a, 3);
        std::vector<std::size_t> dense = oracle::denseCohomology(c.segment());
        CHECK(hhDims(c).dims == dense);
    }
}

TEST_CASE("differentials square to zero", "[hochschild]")
{
    std::vector<GradedPtr> corpus = {rationalsGraded(),
                                     gen::dualNumbers(),
                                     gen::groupAlgebraZ2(),
                                     gen::upperTriangular(),
                                     tTwo(),
                                     freeGraded(gen::vPoset()),
                                     freeGraded(gen::grid()),
                                     gen::inflated(gen::vPoset(), {1, 2, 0}),
                                     gen::tensorWithAlgebra(gen::aTwo(), gen::dualNumbers())};
    std::mt19937 rng(404);
    for (int trial = 0; trial < 20; ++trial)
        corpus.push_back(gen::randomGraded(rng));
    for (const GradedPtr& a : corpus)
        for (SignConvention c : kConventions)
        {
            HochschildComplex h = buildComplex(a, 3, c);
            CHECK_NOTHROW(checkComplex(h.segment()));
            for (std::size_t n = 0; n + 1 < h.segment().d.size(); ++n)
                CHECK((h.differential(n + 1) * h.differential(n)).isZero());
            std::size_t expected = 0;
            for (const CochainBlock& b : h.blocks(2))
                expected += b.width();
            CHECK(h.dim(2) == expected);
        }
}

TEST_CASE("differential matches the direct algebra formula", "[hochschild]")
{
    for (const GradedPtr& a : {gen::dualNumbers(), gen::groupAlgebraZ2(), gen::upperTriangular()})
    {
        HochschildComplex h = buildComplex(a, 2);
        for (std::size_t n = 0; n <= 2; ++n)
            CHECK(oracle::toDenseMatrix(h.differential(n)) == oracle::algebraDifferential(*a, n));
    }
}

TEST_CASE("free posets give the cohomology of the nerve", "[hochschild]")
{
    std::mt19937 rng(12);
    for (int trial = 0; trial < 10; ++trial)
    {
        CatPtr p = gen::randomPoset(rng, 1 + rng() % 4);
        CHECK(hh(freeGraded(p), 3) == oracle::posetCohomology(*p, 3));
    }
    CatPtr circle = posetCategory({"a", "b", "c", "d"}, {{"a", "c"}, {"a", "d"}, {"b", "c"}, {"b", "d"}});
    CHECK(hh(freeGraded(circle), 2) == std::vector<std::size_t>{1, 1, 0});
}

TEST_CASE("cohomology does not depend on the sign convention or the basis", "[hochschild]")
{
    std::mt19937 rng(5);
    for (int trial = 0; trial < 10; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        auto dims = hh(a, 3);
        CHECK(hh(a, 3, SignConvention::Flipped) == dims);
        CHECK(hh(gen::randomBasisChange(rng, a).category, 3) == dims);
    }
}

TEST_CASE("restriction maps", "[hochschild]")
{
    GradedPtr ka2 = freeGraded(gen::aTwo());
    HochschildComplex c = buildComplex(ka2, 3);

    Restriction id = restrictComplex(GradedFunctor::identity(ka2), c);
    for (std::size_t n = 0; n <= 4; ++n)
        CHECK(id.map.maps[n] == QMatrix::identity(c.dim(n)));

    Restriction zero = restrictComplex(inclusionOf(ka2, fullSubcategory(gen::aTwo(), {0})), c);
    for (std::size_t n = 0; n <= 4; ++n)
        CHECK(rank(zero.map.maps[n]) == zero.map.maps[n].rows());

    for (const GradedPtr& a : {tTwo(), gen::inflated(gen::vPoset(), {2, 1, 1})})
    {
        HochschildComplex h = buildComplex(a, 3);
        Restriction counit = restrictIntrinsic(sharpOf(a).functor, h);
        for (const QMatrix& m : counit.map.maps)
            CHECK(isInvertible(m));
        CHECK_FALSE(chainMapFailure(h.segment(), counit.target.segment(), counit.map));
    }

    std::mt19937 rng(31);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        HochschildComplex h = buildComplex(a, 2);
        GradedFunctor f1 = inclusionOf(a, gen::randomSubcategory(rng, a->base()));
        GradedFunctor f2 = inclusionOf(f1.source(), gen::randomSubcategory(rng, f1.source()->base()));
        Restriction r1 = restrictComplex(f1, h);
        Restriction r2 = restrictComplex(f2, r1.target);
        Restriction r12 = restrictComplex(GradedFunctor::compose(f1, f2), h);
        CHECK_FALSE(chainMapFailure(h.segment(), r1.target.segment(), r1.map));
        for (std::size_t n = 0; n <= 3; ++n)
            CHECK(r12.map.maps[n] == r2.map.maps[n] * r1.map.maps[n]);
    }
}

TEST_CASE("injective restrictions are surjective and conversely", "[hochschild]")
{
    std::mt19937 rng(2024);
    std::size_t injectiveSeen = 0, surjectiveSeen = 0;
    for (int trial = 0; trial < 25; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        std::vector<GradedFunctor> functors = {inclusionOf(a, gen::randomSubcategory(rng, a->base())),
                                               sharpOf(a).functor,
                                               gen::randomBasisChange(rng, a).functor};
        GradedPullback p = pullbackGraded(functors[0], inclusionOf(a, gen::randomSubcategory(rng, a->base())));
        functors.push_back(GradedFunctor::compose(functors[0], p.first));
        HochschildComplex h = buildComplex(a, 2);
        for (const GradedFunctor& f : functors)
        {
            REQUIRE(f.isSubcartesian());
            Restriction r = restrictIntrinsic(f, h);
            for (std::size_t n = 0; n <= 3; ++n)
            {
                const QMatrix& m = r.map.maps[n];
                if (nerveInjective(f.sharpFunctor(), n))
                {
                    ++injectiveSeen;
                    CHECK(rank(m) == m.rows());
                }
                if (nerveSurjective(f.sharpFunctor(), n))
                {
                    ++surjectiveSeen;
                    CHECK(rank(m) == m.cols());
                }
            }
        }
    }
    CHECK(injectiveSeen >= 20);
    CHECK(surjectiveSeen >= 20);
}

TEST_CASE("support complexes", "[hochschild]")
{
    GradedPtr t2 = tTwo();
    HochschildComplex c = buildComplex(t2, 3);
    SupportComplex s = supportComplex(inclusionOf(t2, discretePart(t2->base())), c);
    for (std::size_t n = 0; n <= 4; ++n)
        CHECK(s.segment.dims[n] == n);
    CHECK_NOTHROW(checkComplex(s.segment));

    SupportComplex all = supportComplex(GradedFunctor::identity(t2), c);
    for (std::size_t n = 0; n <= 4; ++n)
        CHECK(all.segment.dims[n] == 0);

    GradedPtr ka2 = freeGraded(gen::aTwo());
    HochschildComplex plain = buildComplex(ka2, 2);
    CHECK_NOTHROW(supportComplex(inclusionOf(ka2, discretePart(gen::aTwo())), plain));
    GradedFunctor collapse = GradedFunctor::compose(inclusionOf(ka2, everything(gen::aTwo())),
                                                    sharpOf(ka2).functor);
    CHECK(supportComplex(collapse, plain).segment.dims == std::vector<std::size_t>{0, 0, 0, 0});
}

TEST_CASE("sheaf property of the cochain functor", "[hochschild]")
{
    for (SignConvention conv : kConventions)
    {
        GradedPtr kv = freeGraded(gen::vPoset());
        HochschildComplex c = buildComplex(kv, 3, conv);
        requireExact(sheafCheck(c, chainCoverOf(kv)));
        requireExact(sheafCheck(c, {GradedFunctor::identity(kv)}));

        GradedPtr grid = gen::tensorWithAlgebra(gen::grid(), gen::dualNumbers());
        requireExact(sheafCheck(buildComplex(grid, 2, conv), chainCoverOf(grid)));

        std::mt19937 rng(8);
        for (int trial = 0; trial < 8; ++trial)
        {
            GradedPtr a = gen::randomGraded(rng);
            std::vector<GradedFunctor> cover = {GradedFunctor::identity(a)};
            for (int k = 0; k < 2; ++k)
                cover.push_back(inclusionOf(a, gen::randomSubcategory(rng, a->base())));
            std::shuffle(cover.begin(), cover.end(), rng);
            requireExact(sheafCheck(buildComplex(a, 2, conv), cover));
        }
    }

    GradedPtr ka2 = freeGraded(gen::aTwo());
    try
    {
        sheafCheck(buildComplex(ka2, 2), {inclusionOf(ka2, discretePart(gen::aTwo()))});
        FAIL("a non-cover passed");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == "CoverCheckFailed");
    }
}

TEST_CASE("Mayer-Vietoris sequences", "[hochschild]")
{
    for (SignConvention conv : kConventions)
    {
        GradedPtr kv = freeGraded(gen::vPoset());
        HochschildComplex c = buildComplex(kv, 3, conv);
        auto cover = chainCoverOf(kv);
        REQUIRE(cover.size() == 2);
        ExactnessReport r = mayerVietoris(c, cover[0], cover[1]);
        requireExact(r);
        REQUIRE(r.les);
        CHECK(r.les->terms.size() == 12);

        GradedPtr opens = freeGraded(threeOpens());
        auto pieces = chainCoverOf(opens);
        REQUIRE(pieces.size() == 2);
        ExactnessReport toy = mayerVietoris(buildComplex(opens, 3, conv), pieces[0], pieces[1]);
        requireExact(toy);
        // HH of the pieces: two copies of kA2 and their overlap, one point
        CHECK(toy.les->dims[0] == 1);
        CHECK(toy.les->dims[1] == 2);
        CHECK(toy.les->dims[2] == 1);

        GradedPtr ringed = gen::tensorWithAlgebra(threeOpens(), gen::dualNumbers());
        auto ringedPieces = chainCoverOf(ringed);
        requireExact(mayerVietoris(buildComplex(ringed, 2, conv), ringedPieces[0], ringedPieces[1]));

        ExactnessReport degenerate = mayerVietoris(c, GradedFunctor::identity(kv), GradedFunctor::identity(kv));
        requireExact(degenerate);
    }

    std::mt19937 rng(77);
    for (int trial = 0; trial < 6; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        GradedFunctor part = inclusionOf(a, gen::randomSubcategory(rng, a->base()));
        requireExact(mayerVietoris(buildComplex(a, 2), GradedFunctor::identity(a), part));
    }

    GradedPtr kv = freeGraded(gen::vPoset());
    try
    {
        GradedFunctor points = inclusionOf(kv, discretePart(kv->base()));
        mayerVietoris(buildComplex(kv, 2), points, points);
        FAIL("a non-cover passed");
    }
    catch (const Error& e)
    {
        CHECK(e.code() == "NotACover");
    }
}

TEST_CASE("localization sequences are canonically isomorphic", "[hochschild]")
{
    for (SignConvention conv : kConventions)
    {
        ArrowGraded arrow = arrowCategory(identityBimodule(rationalsGraded()));
        GradedPtr t2 = arrow.category;
        const std::vector<char>& cross = arrow.crossIdeal;
        HochschildComplex c = buildComplex(t2, 3, conv);
        requireExact(localizationCheck(c, cross, discretePart(t2->base())));

        std::vector<char> none(t2->base()->morphismCount(), 0);
        requireExact(localizationCheck(c, none, everything(t2->base())));

        std::mt19937 rng(19);
        for (int trial = 0; trial < 6; ++trial)
        {
            GradedPtr a = gen::randomGraded(rng);
            gen::Decomposition d = gen::randomDecomposition(rng, a->base());
            requireExact(localizationCheck(buildComplex(a, 2, conv), d.ideal, d.complement));
        }

        // opens: V the identities and U1 -> U0, Z the inclusion of U2
        CatPtr opens = threeOpens();
        GradedPtr ko = gen::tensorWithAlgebra(opens, gen::dualNumbers());
        std::vector<char> z = morphismSet(*opens, {"U2<U0"});
        Subcategory v = generatedSubcategory(opens, {0, 1, 2}, {*opens->findMorphism("U1<U0")});
        REQUIRE(decompositionCheck(*opens, z, v));
        requireExact(localizationCheck(buildComplex(ko, 2, conv), z, v));
    }
}

TEST_CASE("connecting maps of arrow categories", "[hochschild]")
{
    for (SignConvention conv : kConventions)
    {
        TriangleReport t2 = connectingMaps(identityBimodule(rationalsGraded()), 3, conv);
        requireExact(t2.report);
        CHECK(t2.hhArrow == std::vector<std::size_t>{1, 0, 0, 0});
        CHECK(t2.ext == std::vector<std::size_t>{1, 0, 0});

        Bimodule regular = identityBimodule(gen::dualNumbers());
        TriangleReport lambda = connectingMaps(regular, 3, conv);
        requireExact(lambda.report);
        CHECK(lambda.hhRight == std::vector<std::size_t>{2, 1, 1, 1});
        std::vector<std::size_t> identity(regular.carrier().size());
        for (std::size_t s = 0; s < identity.size(); ++s)
            identity[s] = s;
        CHECK(lambda.ext[0] == morphismSpace(regular, regular, identity).size());

        Bimodule zero = zeroBimodule(rationalsGraded(), rationalsGraded(), SetBifunctor::identity(terminalCategory()));
        TriangleReport trivial = connectingMaps(zero, 2, conv);
        requireExact(trivial.report);
        for (const QMatrix& m : trivial.alpha.maps)
            CHECK(m.isZero());
        for (const QMatrix& m : trivial.beta.maps)
            CHECK(m.isZero());
    }
}

TEST_CASE("censoring subcategories", "[hochschild]")
{
    GradedPtr t2 = tTwo();
    CensoringVerdict all = censoringCheck(buildComplex(t2, 3), everything(t2->base()));
    CHECK(all.censoring);
    CHECK(all.bijective);

    CensoringVerdict part = censoringCheck(buildComplex(t2, 3), discretePart(t2->base()));
    CHECK_FALSE(part.censoring);
    CHECK_FALSE(part.witness.empty());

    Bimodule zero = zeroBimodule(rationalsGraded(), rationalsGraded(), SetBifunctor::identity(terminalCategory()));
    GradedPtr split = arrowCategory(zero).category;
    CensoringVerdict v = censoringCheck(buildComplex(split, 3), discretePart(split->base()));
    CHECK(v.censoring);
    CHECK(v.bijective);
}
