/**
 * Pseudofunctors from a finite category into graded categories and
 * bimodules, their Grothendieck constructions, base change, the C* cover,
 * composition-chain covers and the comparison of Hochschild complexes.
 *
 * A pseudofunctor over 𝒞 assigns a graded category 𝔞_C to every object, an
 * 𝔞_{C′}-S_c-𝔞_C-bimodule M_c to every c: C → C′ and, to every composable
 * pair of non-identity morphisms (c′, c), a coherence isomorphism
 * (S_{c′}∘S_c, M_{c′}⊗M_c) → (S_{c′c}, M_{c′c}).  On identities M_{1_C} is
 * the identity bimodule, and pairs involving an identity compose through
 * the bimodule actions.
 */

#ifndef MGC_GROTH_HPP
#define MGC_GROTH_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>
#include "mgc/hochschild.hpp"

namespace mgc {

/**
 * Coherence data for c′ ∘ c.  products[(p′, p)] lists s′s-constants with
 * entry i·dim(p) + j the image of m′_i ⊗ m_j in M_{c′c}.
 */
struct Coherence
{
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> elements;   // (s′, s) ↦ element of S_{c′c}
    std::map<std::pair<SpaceId, SpaceId>, std::vector<SparseVector> > products;
};

struct PseudoFunctor
{
    CatPtr base;
    std::vector<GradedPtr> fibers;                             // per object
    std::vector<Bimodule> edges;                               // per morphism
    std::map<std::pair<MorId, MorId>, Coherence> coherence;    // (c′, c), both non-identity
};

/**
 * Element s′s of S_{c′c} for s′ ∈ S_{c′}, s ∈ S_c.
 */
std::size_t composeElements(const PseudoFunctor& p, MorId outer, std::size_t s2, MorId inner, std::size_t s1);

/**
 * Target space in M_{c′c} and constants of the product M_{c′} ⊗ M_c on the
 * spaces (p′, p).
 */
std::pair<SpaceId, const std::vector<SparseVector>*> composeSpaces(const PseudoFunctor& p, MorId outer, SpaceId p2,
                                                                   MorId inner, SpaceId p1);

/**
 * Unit strictness, well-definedness, equivariance and invertibility of
 * every coherence map and associativity on every composable triple.
 * Throws Error("InvalidPseudofunctor") for malformed data and
 * Error("CoherenceFailed") naming (c″, c′, c) or (c′, c) and the entry.
 */
void validatePseudofunctor(const PseudoFunctor& p);

/**
 * The constant pseudofunctor at a over 𝒞 with identity bimodules.
 */
PseudoFunctor constantPseudofunctor(const CatPtr& c, const GradedPtr& a);

/* ------------------------------------------------------------------ */

/**
 * (Ũ, 𝔞̃): objects (C, U) and (C, A), morphisms (c, s) for s ∈ S_c and
 * hom spaces (M_c)_s(A, A′).  Objects are ordered by C, morphisms by c then
 * s with identities first, as in CategoryBuilder.
 */
struct Grothendieck
{
    PseudoFunctor diagram;
    GradedPtr category;
    std::vector<std::pair<ObjId, ObjId> > baseObjects;          // (C, U)
    std::vector<std::pair<MorId, std::size_t> > baseMorphisms;  // (c, s)
    std::vector<std::pair<ObjId, ObjId> > objects;              // (C, A)
    std::vector<std::pair<MorId, SpaceId> > homSpaces;          // hom ↦ (c, space of M_c)
    std::map<std::pair<ObjId, ObjId>, ObjId> baseObjectIndex;
    std::map<std::pair<MorId, std::size_t>, MorId> baseMorphismIndex;
    std::map<std::pair<ObjId, ObjId>, ObjId> objectIndex;
};

/**
 * Validates the diagram first.
 */
Grothendieck grothendieck(const PseudoFunctor& p);

/**
 * The graded functor between Grothendieck constructions induced by
 * ψ: 𝒟′ → 𝒟 when the source diagram is the target diagram restricted
 * along ψ.  Hom maps are identities.
 */
GradedFunctor grothendieckFunctor(const Grothendieck& source, const Grothendieck& target, const Functor& psi);

/**
 * The inclusion 𝔞_D → 𝔞̃ of the fiber over D.
 */
GradedFunctor fiberInclusion(const Grothendieck& g, ObjId d);

/* ------------------------------------------------------------------ */

struct BaseChange
{
    PseudoFunctor diagram;   // P^Φ over 𝒟
    Grothendieck total;      // (Ũ^Φ, 𝔞̃^Φ)
    GradedFunctor functor;   // Φ̃ = (φ, δ): 𝔞̃^Φ → 𝔞̃
};

/**
 * P^Φ with coherence materialized from P, and Φ̃ into g = grothendieck(P).
 */
BaseChange baseChange(const Grothendieck& g, const Functor& phi);

/* ------------------------------------------------------------------ */

/**
 * The cover (𝔞̃|_{C_i} → 𝔞̃) of the C* construction and its sheaf check.
 */
struct CStarReport
{
    ArrowBase star;                                   // 𝒞* = 𝒞 →_S e
    std::vector<ObjId> anchors;
    std::map<std::pair<std::size_t, std::size_t>, ProductCone> products;   // i < j
    std::vector<BaseChange> pieces;                   // slices over the anchors
    ExactnessReport report;
};

/**
 * Throws Error("NoAnchorMap") naming C if no anchor receives a map from C,
 * Error("MissingProduct") naming C_i, C_j if a product is absent.
 */
CStarReport cstarDiagram(const PseudoFunctor& p, const std::vector<ObjId>& anchors, std::size_t maxDegree,
                         SignConvention convention = SignConvention::Standard);

/* ------------------------------------------------------------------ */

struct ChainCoverReport
{
    ChainCover cover;
    std::vector<BaseChange> pieces;
    ExactnessReport sheaf;
    std::optional<ExactnessReport> mayerVietoris;   // for two chains
};

/**
 * Sheaf check over the composition-chain cover of a poset base and, when
 * the cover has two chains, the Mayer-Vietoris sequence.  Throws
 * Error("NotPoset").
 */
ChainCoverReport chainCoverMv(const PseudoFunctor& p, std::size_t maxDegree,
                              SignConvention convention = SignConvention::Standard);

/* ------------------------------------------------------------------ */

/**
 * 𝔞̃ ≅ (𝔞̃_0 →_N 𝔞̃_1) for a thin ideal 𝒵 of 𝒞 with 𝒞 ≅ 𝒞_0 →_Z 𝒞_1.
 * comparison goes from the arrow category to 𝔞̃ and is an isomorphism.
 */
struct ArrowDecomposition
{
    BaseChange below;
    BaseChange above;
    Bimodule bimodule;          // N
    ArrowGraded arrow;
    GradedFunctor comparison;
    bool isomorphism = false;
};

/**
 * Throws Error("NotArrowShaped") if 𝒵 is not thin or does not exhibit 𝒞
 * as an arrow category.
 */
ArrowDecomposition arrowDecomposition(const Grothendieck& g, const std::vector<char>& ideal);

/**
 * Splits off the minimal object of a chain base repeatedly; one
 * decomposition per level, the last one over a two-object chain.
 */
std::vector<ArrowDecomposition> unrollChain(const Grothendieck& g);

/* ------------------------------------------------------------------ */

/**
 * Strict covariant diagram: F_c: 𝔞_C → 𝔞_{C′} for c: C → C′ with
 * F_{c′c} = F_{c′}F_c and identities on identities.  Its pseudofunctor has
 * edges M_{F_c} and coherence x′ ⊗ x ↦ x′ ∘ F_{c′}(x).
 */
struct FunctorialDiagram
{
    CatPtr base;
    std::vector<GradedPtr> fibers;
    std::vector<GradedFunctor> functors;   // per morphism
};

/**
 * Throws Error("CoherenceFailed") if the functors do not compose strictly.
 */
PseudoFunctor toPseudofunctor(const FunctorialDiagram& d);

struct ComparisonDegree
{
    std::size_t degree = 0;
    std::size_t total = 0;   // dim HH^n(𝔞̃|_C)
    std::size_t fiber = 0;   // dim HH^n(𝔞_C)
    bool isomorphism = false;
};

struct ComparisonSquare
{
    MorId morphism;          // c: C′ → C
    std::vector<char> commutes;   // per degree
};

struct ComparisonReport
{
    std::size_t truncation = 0;
    SignConvention convention = SignConvention::Standard;
    std::vector<std::vector<ComparisonDegree> > objects;   // per C, degrees 0..N−1
    std::vector<ComparisonSquare> squares;

    bool holds() const;
};

/**
 * F_C*: HH(𝔞̃|_C) → HH(𝔞_C) for every C in degrees 0..N−1 and the square
 * F_{C′}* F̃_c* = F_c* F_C* on cohomology for every non-identity c.  Throws
 * Error("NotADelta") or Error("NotSubcartesian").
 */
ComparisonReport comparisonCheck(const FunctorialDiagram& d, std::size_t maxDegree,
                                 SignConvention convention = SignConvention::Standard);

}   // namespace mgc

#endif
