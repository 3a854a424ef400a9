/**
 * Finite categories given by explicit composition tables, functors between
 * them, simplicial nerves, n-covers, pullbacks, subcategories, ideals,
 * set-valued bifunctors, arrow categories and composition-chain covers.
 *
 * Objects and morphisms are addressed by their declaration index.  Every
 * FinCat is immutable once validated and is shared through CatPtr.
 */

#ifndef MGC_FINCAT_HPP
#define MGC_FINCAT_HPP

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>
#include "mgc/error.hpp"

namespace mgc {

using ObjId = std::size_t;
using MorId = std::size_t;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

/**
 * An unvalidated category description, as read from a file.
 */
struct RawCategory
{
    struct Morphism
    {
        std::string name;
        std::string source;
        std::string target;
    };

    std::vector<std::string> objects;
    std::vector<Morphism> morphisms;
    std::map<std::string, std::string> identities;
    std::vector<std::array<std::string, 3> > compositions;   // (g, f, g∘f)
};

struct Violation
{
    std::string code;
    std::string detail;
};

class FinCat;
using CatPtr = std::shared_ptr<const FinCat>;

class FinCat
{
    public:
        /**
         * All axiom violations of a raw description (empty if valid).
         */
        static std::vector<Violation> check(const RawCategory& raw);

        /**
         * Validated category; throws Error carrying the first violation's
         * code and all violations in the detail.
         */
        static CatPtr fromRaw(const RawCategory& raw);

        std::size_t objectCount() const { return objectNames_.size(); }
        std::size_t morphismCount() const { return morphismNames_.size(); }

        const std::string& objectName(ObjId x) const { return objectNames_[x]; }
        const std::string& morphismName(MorId u) const { return morphismNames_[u]; }
        std::optional<ObjId> findObject(const std::string& name) const;
        std::optional<MorId> findMorphism(const std::string& name) const;

        ObjId source(MorId u) const { return source_[u]; }
        ObjId target(MorId u) const { return target_[u]; }
        MorId identity(ObjId x) const { return identity_[x]; }
        bool isIdentity(MorId u) const { return identity_[source_[u]] == u; }

        /**
         * g∘f; requires target(f) = source(g).
         */
        MorId compose(MorId g, MorId f) const;

        const std::vector<MorId>& hom(ObjId a, ObjId b) const { return hom_[a * objectCount() + b]; }
        const std::vector<MorId>& outgoing(ObjId a) const { return outgoing_[a]; }

        RawCategory toRaw() const;

        /**
         * Same tables and names.
         */
        bool sameAs(const FinCat& other) const;

    private:
        friend class CategoryBuilder;

        std::vector<std::string> objectNames_;
        std::vector<std::string> morphismNames_;
        std::vector<ObjId> source_;
        std::vector<ObjId> target_;
        std::vector<MorId> identity_;
        std::vector<MorId> comp_;                 // comp_[g * |Mor| + f]
        std::vector<std::vector<MorId> > hom_;
        std::vector<std::vector<MorId> > outgoing_;

        void index();
};

/**
 * Programmatic construction of categories.  addObject creates the identity
 * morphism; composites with identities are filled in automatically.
 */
class CategoryBuilder
{
    public:
        ObjId addObject(const std::string& name, const std::string& identityName = "");
        MorId addMorphism(const std::string& name, ObjId source, ObjId target);
        void setComposite(MorId g, MorId f, MorId gf);
        std::size_t morphismCount() const { return raw_.morphisms.size(); }

        /**
         * Validated category; throws Error on violations.
         */
        CatPtr build() const;

    private:
        RawCategory raw_;
        std::vector<std::string> objectIds_;
        std::vector<MorId> identities_;
        std::vector<ObjId> source_;
        std::vector<ObjId> target_;
        std::map<std::pair<MorId, MorId>, MorId> comp_;
};

/**
 * Poset category with the given objects and (not necessarily transitive)
 * relations x ≤ y; morphism names are "x<y" and identities "id_x".
 */
CatPtr posetCategory(const std::vector<std::string>& objects,
                     const std::vector<std::pair<std::string, std::string> >& relations);

/**
 * The chain 0 → 1 → ... → n as a poset.
 */
CatPtr chainCategory(std::size_t n);

/**
 * Terminal category e.
 */
CatPtr terminalCategory();

/**
 * One object with the given finite monoid as endomorphisms.  table[a][b]
 * is the index of a·b; element 0 must be the unit.
 */
CatPtr monoidCategory(const std::vector<std::string>& elements,
                      const std::vector<std::vector<std::size_t> >& table);

bool isPoset(const FinCat& c);
bool isDelta(const FinCat& c);

/* ------------------------------------------------------------------ */

class Functor
{
    public:
        Functor() = default;

        /**
         * Validated functor; throws Error("InvalidFunctor").
         */
        static Functor make(CatPtr source, CatPtr target,
                            std::vector<ObjId> objectMap, std::vector<MorId> morphismMap);
        static Functor identity(CatPtr c);

        /**
         * g∘f.
         */
        static Functor compose(const Functor& g, const Functor& f);

        const CatPtr& source() const { return source_; }
        const CatPtr& target() const { return target_; }
        ObjId onObject(ObjId x) const { return objects_[x]; }
        MorId onMorphism(MorId u) const { return morphisms_[u]; }
        const std::vector<ObjId>& objectMap() const { return objects_; }
        const std::vector<MorId>& morphismMap() const { return morphisms_; }

        bool isInjectiveOnMorphisms() const;
        bool isBijective() const;

    private:
        CatPtr source_;
        CatPtr target_;
        std::vector<ObjId> objects_;
        std::vector<MorId> morphisms_;
};

/* ------------------------------------------------------------------ */

/**
 * An n-simplex of a nerve: a path of n composable morphisms u_0, ..., u_{n-1}
 * (u_0 first) starting at the object start.  A 0-simplex has no morphisms.
 */
struct Simplex
{
    ObjId start = 0;
    std::vector<MorId> mors;

    std::size_t degree() const { return mors.size(); }
    bool operator<(const Simplex& other) const;
    bool operator==(const Simplex& other) const { return start == other.start && mors == other.mors; }
};

/**
 * Vertex i (0 ≤ i ≤ n) of a simplex.
 */
ObjId simplexVertex(const FinCat& c, const Simplex& s, std::size_t i);

/**
 * |u| = u_{n-1} ... u_0, or the identity of start for a 0-simplex.
 */
MorId simplexComposite(const FinCat& c, const Simplex& s);

/**
 * All n-simplices, in lexicographic order of (u_0, ..., u_{n-1}); objects
 * in declaration order when n = 0.
 */
std::vector<Simplex> nerve(const FinCat& c, std::size_t n);

/**
 * |N_n| by dynamic programming, without enumeration.
 */
std::size_t nerveSize(const FinCat& c, std::size_t n);

Simplex mapSimplex(const Functor& f, const Simplex& s);

std::string simplexName(const FinCat& c, const Simplex& s);

/* ------------------------------------------------------------------ */

struct CategoryPullback
{
    CatPtr category;
    Functor first;
    Functor second;
    std::vector<std::pair<ObjId, ObjId> > objectPairs;
    std::vector<std::pair<MorId, MorId> > morphismPairs;
};

/**
 * Pullback of two functors with common target; objects and morphisms are
 * compatible pairs named "(a,b)".  Throws Error("TargetMismatch").
 */
CategoryPullback pullbackCategory(const Functor& f1, const Functor& f2);

/* ------------------------------------------------------------------ */

struct CoverVerdict
{
    bool isCover = true;
    bool infinite = false;          // the request was for an ∞-cover
    std::size_t degreeChecked = 0;  // n, or the depth bound for ∞
    bool stabilized = false;        // the hit-state recursion reached a fixed point
    std::size_t stableDegree = 0;
    std::optional<Simplex> witness; // first unhit simplex in the lowest failing degree
};

/**
 * Joint surjectivity of N_k over k ≤ n for a family of functors into a
 * common target.  n = nullopt requests an ∞-cover checked up to depth
 * (0 selects 2·|Mor(U)|).
 *
 * The check runs a recursion over "hit states": a state records, for a
 * path in U, the end objects of its preimage paths in each member.  A path
 * is hit iff some member's set is nonempty.  Since the set of states is
 * finite and the covered predicate only shrinks with the degree, reaching a
 * fixed point certifies the answer for all larger degrees.
 */
CoverVerdict isNCover(const std::vector<Functor>& family, std::optional<std::size_t> n, std::size_t depth = 0);

/**
 * Independent brute-force per-degree check (enumerates N_k of every member).
 */
bool jointlySurjectiveAt(const std::vector<Functor>& family, std::size_t k);

/**
 * N_n(f) injective / surjective, by enumeration.
 */
bool nerveInjective(const Functor& f, std::size_t n);
bool nerveSurjective(const Functor& f, std::size_t n);

/* ------------------------------------------------------------------ */

/**
 * A subcategory given by membership flags on the ambient objects and
 * morphisms.
 */
struct Subcategory
{
    CatPtr ambient;
    std::vector<char> objects;
    std::vector<char> morphisms;
};

/**
 * Throws Error("NotASubcategory") unless closed and unital.
 */
void checkSubcategory(const Subcategory& s);

/**
 * Smallest subcategory containing the given objects and morphisms.
 */
Subcategory generatedSubcategory(const CatPtr& c, const std::vector<ObjId>& objects,
                                 const std::vector<MorId>& morphisms);
Subcategory fullSubcategory(const CatPtr& c, const std::vector<ObjId>& objects);
Subcategory intersectSubcategories(const Subcategory& a, const Subcategory& b);

/**
 * Subcategory from object and morphism names.
 */
Subcategory namedSubcategory(const CatPtr& c, const std::vector<std::string>& objects,
                             const std::vector<std::string>& morphisms);

struct SubcategoryEmbedding
{
    CatPtr category;      // names copied from the ambient category
    Functor inclusion;
};

SubcategoryEmbedding embedSubcategory(const Subcategory& s);

/* ------------------------------------------------------------------ */

bool isIdeal(const FinCat& c, const std::vector<char>& members);
bool isThinIdeal(const FinCat& c, const std::vector<char>& members);

/**
 * Mor(C) = Mor(V) ⊔ Z with Z an ideal and V a subcategory.
 */
bool decompositionCheck(const FinCat& c, const std::vector<char>& ideal, const Subcategory& v);

std::vector<char> morphismSet(const FinCat& c, const std::vector<std::string>& names);

/* ------------------------------------------------------------------ */

/**
 * A 𝒰-𝒱-bifunctor S with elements s ∈ S(V, U) for V ∈ 𝒱, U ∈ 𝒰, a left
 * action of 𝒰 and a right action of 𝒱.
 */
class SetBifunctor
{
    public:
        struct Element
        {
            std::string name;
            ObjId right;   // V ∈ 𝒱
            ObjId left;    // U ∈ 𝒰
        };

        SetBifunctor() = default;

        /**
         * leftAction[u][s] = u·s (kNone when not composable), rightAction[s][v]
         * = s·v.  Validated; throws Error("InvalidBifunctor").
         */
        static SetBifunctor make(CatPtr left, CatPtr right, std::vector<Element> elements,
                                 std::vector<std::vector<std::size_t> > leftAction,
                                 std::vector<std::vector<std::size_t> > rightAction);

        /**
         * 1_𝒰: elements are the morphisms of 𝒰.
         */
        static SetBifunctor identity(const CatPtr& u);

        /**
         * S_φ(V, U) = 𝒰(φ(V), U) for φ: 𝒱 → 𝒰.
         */
        static SetBifunctor lowerStar(const Functor& phi);

        /**
         * S^φ(V, U) = 𝒱(V, φ(U)) for φ: 𝒰 → 𝒱; a 𝒰-𝒱-bifunctor.
         */
        static SetBifunctor upperStar(const Functor& phi);

        const CatPtr& left() const { return left_; }
        const CatPtr& right() const { return right_; }
        std::size_t size() const { return elements_.size(); }
        const Element& element(std::size_t s) const { return elements_[s]; }
        const std::vector<std::size_t>& at(ObjId right, ObjId left) const;

        std::size_t actLeft(MorId u, std::size_t s) const { return leftAction_[u][s]; }
        std::size_t actRight(std::size_t s, MorId v) const { return rightAction_[s][v]; }

        bool sameAs(const SetBifunctor& other) const;

    private:
        CatPtr left_;
        CatPtr right_;
        std::vector<Element> elements_;
        std::vector<std::vector<std::size_t> > leftAction_;
        std::vector<std::vector<std::size_t> > rightAction_;
        std::vector<std::vector<std::size_t> > byPair_;
};

struct BifunctorComposite
{
    SetBifunctor composite;
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> classOf;   // (s, t) ↦ [s, t]
    std::vector<std::pair<std::size_t, std::size_t> > representative;
};

/**
 * S∘T for a 𝒰-𝒱-bifunctor S and a 𝒱-𝒲-bifunctor T:
 * ∐_V S(V,U) × T(W,V) modulo (sv, t) ∼ (s, vt).
 */
BifunctorComposite composeBifunctors(const SetBifunctor& s, const SetBifunctor& t);

/* ------------------------------------------------------------------ */

struct ArrowBase
{
    CatPtr category;              // objects: 𝒱 then 𝒰; morphisms: 𝒱, 𝒰, then S
    Functor fromRight;            // 𝒱 → 𝒲
    Functor fromLeft;             // 𝒰 → 𝒲
    std::vector<MorId> crossMorphism;
};

/**
 * 𝒲 = 𝒱 →_S 𝒰.  Names are kept unless 𝒱 and 𝒰 share one, in which case
 * they are prefixed with "V." and "U.".
 */
ArrowBase arrowCategoryBase(const SetBifunctor& s);

struct ArrowRecognition
{
    bool ok = false;
    std::string failure;          // NotThin, ObjectsNotCovered, ExtraCrossMorphisms
    std::string detail;
    Subcategory below;            // 𝒱
    Subcategory above;            // 𝒰
    SetBifunctor bifunctor;       // S restricted to cross morphisms
    std::vector<MorId> crossMorphisms;
    ArrowBase base;
    Functor comparison;           // base.category → W, an isomorphism
};

ArrowRecognition recognizeArrow(const CatPtr& w, const std::vector<char>& ideal, bool requireThin = true);

/* ------------------------------------------------------------------ */

struct ChainCover
{
    std::vector<std::vector<ObjId> > chains;   // maximal covering chains, bottom first
    std::vector<Subcategory> pieces;
    std::map<std::pair<std::size_t, std::size_t>, Subcategory> intersections;
};

/**
 * Maximal composition chains of a finite poset and their pairwise
 * intersections.  Throws Error("NotPoset").
 */
ChainCover chainCover(const CatPtr& p);

/**
 * Slice category C/X: objects are morphisms c: C' → X, morphisms d: c'' → c'
 * with c'∘d = c''.  Also returns the forgetful functor to C.
 */
struct Slice
{
    CatPtr category;
    Functor forget;
    std::vector<MorId> objectMorphism;   // object index ↦ c
    ObjId terminal;                      // the object 1_X
};

Slice sliceCategory(const CatPtr& c, ObjId x);

/**
 * Product of a and b located by exhaustive universal-property search.
 */
struct ProductCone
{
    ObjId product;
    MorId toFirst;
    MorId toSecond;
};

std::optional<ProductCone> findProduct(const FinCat& c, ObjId a, ObjId b);

}   // namespace mgc

#endif
