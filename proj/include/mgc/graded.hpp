/**
 * Map-graded linear categories over Q, graded functors, restriction along
 * base functors, pullbacks, the sharp construction and transport of
 * structure along changes of basis.
 *
 * A graded category over U has a fiber of objects over every object of U
 * and a hom space a_u(A, A') for every morphism u: U -> U' and A, A' in
 * the fibers over U and U'.  The triples (u, A, A') are exactly the
 * morphisms of the sharp base U#, and hom spaces are addressed by their
 * U# morphism index.
 */

#ifndef MGC_GRADED_HPP
#define MGC_GRADED_HPP

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>
#include "mgc/fincat.hpp"
#include "mgc/qmatrix.hpp"

namespace mgc {

using HomId = std::size_t;

/**
 * A linear combination of named basis elements.
 */
struct RawTerm
{
    std::string basis;
    Rational coeff;
};

/**
 * Unvalidated graded category description.  Missing homs are zero, missing
 * products are zero.  Basis names are unique across the whole category.
 */
struct RawGradedCategory
{
    struct Hom
    {
        std::string morphism;
        std::string source;
        std::string target;
        std::vector<std::string> basis;
    };
    struct Product
    {
        std::string left;
        std::string right;
        std::vector<RawTerm> result;
    };

    RawCategory base;
    std::vector<std::pair<std::string, std::vector<std::string> > > fibers;   // base object ↦ fiber objects
    std::vector<Hom> homs;
    std::vector<Product> products;                                           // left ∘ right
    std::vector<std::pair<std::string, std::vector<RawTerm> > > units;        // fiber object ↦ 1_A
};

class GradedCat;
using GradedPtr = std::shared_ptr<const GradedCat>;

class GradedCat
{
    public:
        static std::vector<Violation> check(const RawGradedCategory& raw);

        /**
         * Validated graded category; throws Error with the first violation.
         */
        static GradedPtr fromRaw(const RawGradedCategory& raw);

        const CatPtr& base() const { return base_; }
        const CatPtr& sharp() const { return sharp_; }
        const Functor& sharpToBase() const { return sharpToBase_; }

        std::size_t objectCount() const { return objectNames_.size(); }
        const std::string& objectName(ObjId a) const { return objectNames_[a]; }
        ObjId over(ObjId a) const { return over_[a]; }
        const std::vector<ObjId>& fiber(ObjId x) const { return fibers_[x]; }

        std::size_t homCount() const { return dims_.size(); }
        HomId homId(MorId u, ObjId a, ObjId b) const;
        MorId homMorphism(HomId h) const { return sharpToBase_.onMorphism(h); }
        ObjId homSource(HomId h) const { return sharp_->source(h); }
        ObjId homTarget(HomId h) const { return sharp_->target(h); }
        std::size_t dim(HomId h) const { return dims_[h]; }
        const std::string& basisName(HomId h, std::size_t i) const { return basisNames_[h][i]; }

        /**
         * Structure constants: entry i·dim(f) + j is e_i ∘ e_j in the basis
         * of the composite hom space.
         */
        const std::vector<SparseVector>& product(HomId g, HomId f) const;

        /**
         * Bilinear composite of x ∈ a(g) and y ∈ a(f).
         */
        SparseVector compose(HomId g, HomId f, const SparseVector& x, const SparseVector& y) const;

        const SparseVector& unit(ObjId a) const { return units_[a]; }

        RawGradedCategory toRaw() const;

    private:
        friend class GradedBuilder;

        CatPtr base_;
        CatPtr sharp_;
        Functor sharpToBase_;
        std::vector<std::string> objectNames_;
        std::vector<ObjId> over_;
        std::vector<std::vector<ObjId> > fibers_;
        std::vector<std::size_t> dims_;
        std::vector<std::vector<std::string> > basisNames_;
        std::vector<std::vector<SparseVector> > products_;   // products_[g·|homs| + f]
        std::vector<SparseVector> units_;
        std::map<std::tuple<MorId, ObjId, ObjId>, HomId> homIndex_;
};

/**
 * Index-based construction: objects first, then hom bases, products and
 * units.  build() validates.
 */
class GradedBuilder
{
    public:
        explicit GradedBuilder(CatPtr base);

        ObjId addObject(const std::string& name, ObjId over);

        /**
         * Fixes the object set and enumerates the hom triples.
         */
        void freezeObjects();

        HomId homId(MorId u, ObjId a, ObjId b) const;
        void setBasis(HomId h, std::vector<std::string> names);
        void setProduct(HomId g, std::size_t i, HomId f, std::size_t j, SparseVector value);
        void setUnit(ObjId a, SparseVector value);

        std::size_t dim(HomId h) const { return basis_[h].size(); }

        GradedPtr build() const;

    private:
        CatPtr base_;
        std::vector<std::string> objectNames_;
        std::vector<ObjId> over_;
        bool frozen_ = false;
        std::vector<std::tuple<MorId, ObjId, ObjId> > homs_;
        std::map<std::tuple<MorId, ObjId, ObjId>, HomId> homIndex_;
        std::vector<std::vector<std::string> > basis_;
        std::map<std::tuple<HomId, std::size_t, HomId, std::size_t>, SparseVector> products_;
        std::vector<SparseVector> units_;
};

/**
 * Same base tables, fibers, dimensions, constants and units, compared by
 * index (names ignored).  Returns a description of the first difference.
 */
std::optional<std::string> structuralDifference(const GradedCat& a, const GradedCat& b);

/* ------------------------------------------------------------------ */

class GradedFunctor
{
    public:
        GradedFunctor() = default;

        /**
         * homMaps[h] is dim(target hom) x dim(h) for every source hom h.
         * Validated; throws Error("InvalidFunctor").
         */
        static GradedFunctor make(GradedPtr source, GradedPtr target, Functor base,
                                  std::vector<ObjId> objectMap, std::vector<QMatrix> homMaps);
        static GradedFunctor identity(const GradedPtr& a);
        static GradedFunctor compose(const GradedFunctor& g, const GradedFunctor& f);

        const GradedPtr& source() const { return source_; }
        const GradedPtr& target() const { return target_; }
        const Functor& base() const { return base_; }
        ObjId onObject(ObjId b) const { return objects_[b]; }
        const std::vector<ObjId>& objectMap() const { return objects_; }
        const QMatrix& homMap(HomId h) const { return homMaps_[h]; }

        /**
         * Target hom index of F on the source hom h.
         */
        HomId onHom(HomId h) const { return sharp_.onMorphism(h); }

        /**
         * The induced functor on sharp bases.
         */
        const Functor& sharpFunctor() const { return sharp_; }

        bool isSubcartesian() const;
        bool isCartesian() const;

    private:
        GradedPtr source_;
        GradedPtr target_;
        Functor base_;
        std::vector<ObjId> objects_;
        std::vector<QMatrix> homMaps_;
        Functor sharp_;
};

/* ------------------------------------------------------------------ */

struct GradedMap
{
    GradedPtr category;
    GradedFunctor functor;
};

/**
 * a# over U# with singleton fibers and the canonical functor a# -> a.
 */
GradedMap sharpOf(const GradedPtr& a);

/**
 * F# between sharp categories: F subcartesian iff F# cartesian.
 */
GradedFunctor sharpOfFunctor(const GradedFunctor& f, const GradedMap& sharpSource, const GradedMap& sharpTarget);

/**
 * a^φ with its cartesian functor δ: a^φ -> a.
 */
GradedMap restrictGraded(const GradedPtr& a, const Functor& phi);

struct GradedPullback
{
    GradedPtr category;
    GradedFunctor first;
    GradedFunctor second;
};

/**
 * Fibers and hom spaces are set and space pullbacks; hom spaces are
 * equalizers with kernel bases.  Throws Error("TargetMismatch").
 */
GradedPullback pullbackGraded(const GradedFunctor& f1, const GradedFunctor& f2);

/**
 * Transport of structure: new basis vectors are the columns of change[h]
 * in the old basis.  Returns the new category with the cartesian
 * isomorphism new -> old.
 */
GradedMap changeBasis(const GradedPtr& a, const std::vector<QMatrix>& change);

/* ------------------------------------------------------------------ */

/**
 * kU: one object over every object of U, every hom space Q.
 */
GradedPtr freeGraded(const CatPtr& u);

/**
 * Finite-dimensional algebra trivially graded over e.  table[i][j] is
 * e_i·e_j in the basis; unit is the unit vector.
 */
GradedPtr algebraGraded(const std::string& object, const std::vector<std::string>& basis,
                        const std::vector<std::vector<QVector> >& table, const QVector& unit);

/**
 * Q trivially graded over e.
 */
GradedPtr rationalsGraded();

/**
 * Q[x]/(x²) trivially graded over e.
 */
GradedPtr dualNumbersGraded();

}   // namespace mgc

#endif
