/**
 * Graded categories, graded functors, restriction, pullbacks and sharp.
 */

#include <catch_amalgamated.hpp>
#include "mgc/graded.hpp"
#include "support/generators.hpp"
#include "support/oracle.hpp"

using namespace mgc;

namespace {

RawGradedCategory dualNumbersRaw(const std::string& square)
{
    RawGradedCategory raw = gen::dualNumbers()->toRaw();
    for (auto& p : raw.products)
        if (p.left == "x" && p.right == "x")
            p.result = {{"1", Rational(1)}};
    if (square == "1" && std::none_of(raw.products.begin(), raw.products.end(),
                                      [](const auto& p) { return p.left == "x" && p.right == "x"; }))
        raw.products.push_back({"x", "x", {{"1", Rational(1)}}});
    return raw;
}

Functor inclusionOf(const Subcategory& s)
{
    return embedSubcategory(s).inclusion;
}

}   // namespace

TEST_CASE("graded validation", "[graded]")
{
    GradedPtr l = gen::dualNumbers();
    CHECK(l->objectCount() == 1);
    CHECK(l->dim(0) == 2);
    CHECK(l->compose(0, 0, {{1, Rational(1)}}, {{1, Rational(1)}}).empty());

    CHECK_NOTHROW(GradedCat::fromRaw(dualNumbersRaw("1")));

    RawGradedCategory broken = l->toRaw();
    broken.units[0].second = {{"1", Rational(2)}};
    auto v = GradedCat::check(broken);
    REQUIRE(!v.empty());
    CHECK(v.front().code == "BadIdentity");

    // x·x = x with x·1 = x and 1·x = x is associative; x·x = 1 + x is too;
    // an asymmetric rule breaks associativity.
    RawGradedCategory raw;
    raw.base = terminalCategory()->toRaw();
    raw.fibers = {{"*", {"A"}}};
    raw.homs = {{"id", "A", "A", {"1", "p", "q"}}};
    raw.units = {{"A", {{"1", Rational(1)}}}};
    for (const char* b : {"1", "p", "q"})
    {
        raw.products.push_back({"1", b, {{b, Rational(1)}}});
        if (std::string(b) != "1")
            raw.products.push_back({b, "1", {{b, Rational(1)}}});
    }
    raw.products.push_back({"p", "q", {{"p", Rational(1)}}});
    raw.products.push_back({"q", "p", {{"p", Rational(1)}}});
    raw.products.push_back({"q", "q", {{"p", Rational(1)}}});
    auto na = GradedCat::check(raw);
    REQUIRE(!na.empty());
    CHECK(na.front().code == "NonAssociative");

    CatPtr a2 = gen::aTwo();
    GradedPtr ka2 = freeGraded(a2);
    CHECK(ka2->homCount() == 3);
    RawGradedCategory round = ka2->toRaw();
    CHECK_FALSE(structuralDifference(*GradedCat::fromRaw(round), *ka2));
}

TEST_CASE("sharp construction", "[graded]")
{
    std::mt19937 rng(31);
    for (int trial = 0; trial < 20; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        GradedMap s = sharpOf(a);
        CHECK(s.category->objectCount() == a->objectCount());
        for (ObjId x = 0; x < s.category->base()->objectCount(); ++x)
            CHECK(s.category->fiber(x).size() == 1);
        CHECK(s.functor.isSubcartesian());
        GradedMap ss = sharpOf(s.category);
        CHECK_FALSE(structuralDifference(*ss.category, *s.category));
    }
    // Sharp of a trivially graded algebra is the same algebra over U# = e.
    GradedMap sl = sharpOf(gen::dualNumbers());
    CHECK(sl.category->base()->morphismCount() == 1);
    CHECK(sl.functor.isCartesian());
}

TEST_CASE("restriction", "[graded]")
{
    std::mt19937 rng(32);
    for (int trial = 0; trial < 20; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        GradedMap id = restrictGraded(a, Functor::identity(a->base()));
        CHECK_FALSE(structuralDifference(*id.category, *a));
        CHECK(id.functor.isCartesian());

        Functor phi = inclusionOf(gen::randomSubcategory(rng, a->base()));
        GradedMap r = restrictGraded(a, phi);
        CHECK(r.functor.isCartesian());
        CHECK(r.functor.isSubcartesian());

        Functor psi = inclusionOf(gen::randomSubcategory(rng, phi.source()));
        GradedMap twice = restrictGraded(r.category, psi);
        GradedMap once = restrictGraded(a, Functor::compose(phi, psi));
        CHECK_FALSE(structuralDifference(*twice.category, *once.category));
    }

    CatPtr v = gen::vPoset();
    Subcategory d0 = namedSubcategory(v, {}, {"s<t0"});
    SubcategoryEmbedding e = embedSubcategory(d0);
    GradedMap r = restrictGraded(freeGraded(v), e.inclusion);
    CHECK_FALSE(structuralDifference(*r.category, *freeGraded(e.category)));
}

TEST_CASE("cartesian and subcartesian functors", "[graded]")
{
    std::mt19937 rng(33);
    for (int trial = 0; trial < 20; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        GradedMap change = gen::randomBasisChange(rng, a);
        CHECK(change.functor.isCartesian());

        GradedMap sa = sharpOf(a);
        GradedMap sb = sharpOf(change.category);
        GradedFunctor sf = sharpOfFunctor(change.functor, sb, sa);
        CHECK(sf.isCartesian() == change.functor.isSubcartesian());

        // The canonical sharp functor is subcartesian, cartesian iff nonempty fibers are singletons.
        bool singletons = true;
        for (ObjId x = 0; x < a->base()->objectCount(); ++x)
            singletons = singletons && a->fiber(x).size() <= 1;
        CHECK(sa.functor.isSubcartesian());
        CHECK(sa.functor.isCartesian() == singletons);
        GradedFunctor ssa = sharpOfFunctor(sa.functor, sharpOf(sa.category), sa);
        CHECK(ssa.isCartesian());
    }

    // A zero map on a nonzero hom space is neither.
    GradedPtr q = rationalsGraded();
    GradedPtr l = gen::dualNumbers();
    CHECK_THROWS_AS(GradedFunctor::make(q, l, Functor::identity(q->base()), {0}, {QMatrix(2, 1)}), Error);

    // Q -> Q[x]/(x²) as the unit: fully faithful would need equal dims, so not subcartesian.
    GradedFunctor unit = GradedFunctor::make(q, l, Functor::identity(q->base()), {0}, {QMatrix::fromColumns(2, {{1, 0}})});
    CHECK_FALSE(unit.isSubcartesian());
}

TEST_CASE("fully faithful non-surjective functor is subcartesian but not cartesian", "[graded]")
{
    // Q as the full subcategory on one object of the inflated category with two objects.
    CatPtr e = terminalCategory();
    GradedPtr two = gen::inflated(e, {2});
    GradedPtr one = gen::inflated(e, {1});
    GradedFunctor f = GradedFunctor::make(one, two, Functor::identity(e), {0}, {QMatrix::identity(1)});
    CHECK(f.isSubcartesian());
    CHECK_FALSE(f.isCartesian());
}

TEST_CASE("graded pullbacks", "[graded]")
{
    std::mt19937 rng(34);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        GradedFunctor id = GradedFunctor::identity(a);
        GradedPullback self = pullbackGraded(id, id);
        CHECK_FALSE(structuralDifference(*self.category, *restrictGraded(a, self.first.base()).category));

        Subcategory s1 = gen::randomSubcategory(rng, a->base());
        Subcategory s2 = gen::randomSubcategory(rng, a->base());
        GradedMap r1 = restrictGraded(a, inclusionOf(s1));
        GradedMap r2 = restrictGraded(a, inclusionOf(s2));
        GradedPullback pb = pullbackGraded(r1.functor, r2.functor);
        GradedMap meet = restrictGraded(a, inclusionOf(intersectSubcategories(s1, s2)));
        CHECK_FALSE(structuralDifference(*pb.category, *meet.category));
        CHECK(pb.first.isSubcartesian());
    }

    // Equalizers: dimension bounded by both legs, checked against dense ranks.
    for (int trial = 0; trial < 10; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        GradedMap c1 = gen::randomBasisChange(rng, a);
        GradedPullback pb = pullbackGraded(c1.functor, GradedFunctor::identity(a));
        for (HomId h = 0; h < pb.category->homCount(); ++h)
        {
            HomId h1 = pb.first.onHom(h);
            HomId h2 = pb.second.onHom(h);
            CHECK(pb.category->dim(h) <= std::min(c1.category->dim(h1), a->dim(h2)));
            QMatrix eq = QMatrix::hstack(c1.functor.homMap(h1), QMatrix::identity(a->dim(h2)).scaled(Rational(-1)));
            CHECK(pb.category->dim(h) == eq.cols() - oracle::denseRank(eq));
        }
    }
}

TEST_CASE("change of basis round trip", "[graded]")
{
    std::mt19937 rng(35);
    for (int trial = 0; trial < 15; ++trial)
    {
        GradedPtr a = gen::randomGraded(rng);
        std::vector<QMatrix> change, back;
        for (HomId h = 0; h < a->homCount(); ++h)
        {
            change.push_back(gen::randomInvertible(rng, a->dim(h)));
            back.push_back(inverse(change.back()));
        }
        GradedMap there = changeBasis(a, change);
        GradedMap again = changeBasis(there.category, back);
        CHECK_FALSE(structuralDifference(*again.category, *a));
        GradedFunctor comp = GradedFunctor::compose(there.functor, again.functor);
        for (HomId h = 0; h < a->homCount(); ++h)
            CHECK(comp.homMap(h) == QMatrix::identity(a->dim(h)));
    }
}
