/**
 * Descent data for graded categories along a cover of the base and their
 * glueing.
 *
 * A descent datum over U consists of base functors φ_i: V_i -> U, graded
 * categories b_i over V_i and, for every ordered pair (i, j), an
 * isomorphism ρ_ij from the pullback of b_i to the pullback of b_j over
 * V_i ×_U V_j.
 */

#ifndef MGC_DESCENT_HPP
#define MGC_DESCENT_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>
#include "mgc/graded.hpp"

namespace mgc {

/**
 * The two pullbacks of the pieces over one overlap V_i ×_U V_j.
 */
struct Overlap
{
    CategoryPullback pullback;
    GradedMap left;    // b_i pulled back, with its functor to b_i
    GradedMap right;   // b_j pulled back, with its functor to b_j
};

Overlap makeOverlap(const Functor& phiI, const GradedPtr& bI, const Functor& phiJ, const GradedPtr& bJ);

struct DescentDatum
{
    CatPtr base;
    std::vector<Functor> cover;
    std::vector<GradedPtr> pieces;
    std::map<std::pair<std::size_t, std::size_t>, Overlap> overlaps;
    std::map<std::pair<std::size_t, std::size_t>, GradedFunctor> rho;   // left -> right of the overlap
};

/**
 * The datum obtained by restricting a along every member of the cover,
 * with the canonical identifications on overlaps.
 */
DescentDatum descentFromRestriction(const GradedPtr& a, const std::vector<Functor>& cover);

/**
 * First failing triple (i, j, k) of ρ_jk·ρ_ij = ρ_ik, checked on every
 * triple of compatible morphisms, or on the diagonal ρ_ii = 1.
 */
struct CocycleFailure
{
    std::size_t i;
    std::size_t j;
    std::size_t k;
    std::string detail;
};

std::optional<CocycleFailure> checkCocycle(const DescentDatum& d);

struct GlueResult
{
    GradedPtr glued;
    std::vector<GradedFunctor> comparisons;   // b_i -> glued restricted along φ_i, cartesian
    CoverVerdict cover;
};

/**
 * Glues a descent datum.  Objects are classes of fiber objects under the
 * ρ identifications, hom spaces are those of the lexicographically first
 * lift, and composition uses the first lift of each composable pair,
 * checked against all other lifts.  Throws Error with code NotACover,
 * CocycleViolated, CompositionIllDefined or AssociativityFailed.
 *
 * coverDegree is the cover degree demanded of the base functors; lowering
 * it below 3 accepts covers for which glueing may fail.
 */
GlueResult glueDescent(const DescentDatum& d, std::size_t coverDegree = 3);

}   // namespace mgc

#endif
