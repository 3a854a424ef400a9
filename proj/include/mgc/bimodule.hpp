/**
 * Bimodules over graded categories, their tensor products and Hom
 * bimodules, restriction along graded functors, splitting along an
 * ideal-subcategory decomposition and the linear arrow category.
 *
 * An 𝔞-S-𝔟-bimodule M has a space M_s(B, A) for every element
 * s ∈ S(V, U), B over V and A over U, a left action
 * 𝔞_u(A, A′) ⊗ M_s(B, A) → M_{us}(B, A′) and a right action
 * M_s(B, A) ⊗ 𝔟_v(B′, B) → M_{sv}(B′, A).
 */

#ifndef MGC_BIMODULE_HPP
#define MGC_BIMODULE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>
#include "mgc/graded.hpp"

namespace mgc {

using SpaceId = std::size_t;

class Bimodule
{
    public:
        struct Space
        {
            std::size_t element;   // s ∈ S
            ObjId right;           // B ∈ 𝔟
            ObjId left;            // A ∈ 𝔞
        };

        Bimodule() = default;

        const GradedPtr& left() const { return left_; }
        const GradedPtr& right() const { return right_; }
        const SetBifunctor& carrier() const { return carrier_; }

        /**
         * Spaces are ordered by element, then B, then A.  Over 1_𝒰 the space
         * ids coincide with the hom ids of 𝔞.
         */
        std::size_t spaceCount() const { return spaces_.size(); }
        const Space& space(SpaceId p) const { return spaces_[p]; }
        SpaceId spaceId(std::size_t element, ObjId right, ObjId left) const;
        std::size_t dim(SpaceId p) const { return basisNames_[p].size(); }
        const std::string& basisName(SpaceId p, std::size_t i) const { return basisNames_[p][i]; }
        std::size_t totalDim() const;

        /**
         * Target space of a·m for a in the hom h of 𝔞, or kNone.
         */
        SpaceId leftTarget(HomId h, SpaceId p) const;
        SpaceId rightTarget(SpaceId p, HomId h) const;

        /**
         * Entry i·dim(p) + j is a_i·m_j, resp. entry i·dim(h) + j is m_i·b_j.
         */
        const std::vector<SparseVector>& leftConstants(HomId h, SpaceId p) const;
        const std::vector<SparseVector>& rightConstants(SpaceId p, HomId h) const;

        SparseVector actLeft(HomId h, SpaceId p, const SparseVector& a, const SparseVector& m) const;
        SparseVector actRight(SpaceId p, HomId h, const SparseVector& m, const SparseVector& b) const;

        /**
         * m ↦ a·m, resp. m ↦ m·b, as a matrix dim(target) x dim(p).
         */
        QMatrix leftMatrix(HomId h, const SparseVector& a, SpaceId p) const;
        QMatrix rightMatrix(SpaceId p, HomId h, const SparseVector& b) const;

        /**
         * True if the carrier is 1_𝒰 for the base of 𝔞 = 𝔟.
         */
        bool overIdentity() const;

    private:
        friend class BimoduleBuilder;

        struct Action
        {
            SpaceId target;
            std::vector<SparseVector> constants;
        };

        GradedPtr left_;
        GradedPtr right_;
        SetBifunctor carrier_;
        std::vector<Space> spaces_;
        std::map<std::tuple<std::size_t, ObjId, ObjId>, SpaceId> spaceIndex_;
        std::vector<std::vector<std::string> > basisNames_;
        std::map<std::pair<HomId, SpaceId>, Action> leftActions_;
        std::map<std::pair<SpaceId, HomId>, Action> rightActions_;
};

/**
 * Spaces are enumerated on construction; missing constants are zero.
 * build() checks unitality, both associativities and the bimodule law
 * exhaustively and throws Error("InvalidBimodule").
 */
class BimoduleBuilder
{
    public:
        BimoduleBuilder(GradedPtr left, GradedPtr right, SetBifunctor carrier);

        std::size_t spaceCount() const { return module_.spaceCount(); }
        const Bimodule::Space& space(SpaceId p) const { return module_.space(p); }
        SpaceId spaceId(std::size_t element, ObjId right, ObjId left) const;
        void setBasis(SpaceId p, std::vector<std::string> names);
        void setLeft(HomId h, std::size_t i, SpaceId p, std::size_t j, SparseVector value);
        void setRight(SpaceId p, std::size_t i, HomId h, std::size_t j, SparseVector value);

        Bimodule build() const;

    private:
        Bimodule module_;
};

std::vector<Violation> bimoduleViolations(const Bimodule& m);

/**
 * Same carrier tables, dimensions and constants, compared by index.
 */
std::optional<std::string> bimoduleDifference(const Bimodule& a, const Bimodule& b);

/* ------------------------------------------------------------------ */

/**
 * 1_𝔞 over 1_𝒰 with (1_𝔞)_u(A, A′) = 𝔞_u(A, A′).
 */
Bimodule identityBimodule(const GradedPtr& a);

/**
 * M_F for F: 𝔟 → 𝔞 over φ: the 𝔞-S_φ-𝔟-bimodule (M_F)_s(B, A) = 𝔞_s(FB, A).
 */
Bimodule lowerBimodule(const GradedFunctor& f);

/**
 * M^F for F: 𝔞 → 𝔟 over φ: the 𝔞-S^φ-𝔟-bimodule (M^F)_s(B, A) = 𝔟_s(B, FA).
 */
Bimodule upperBimodule(const GradedFunctor& f);

/**
 * F*M for F: 𝔟 → 𝔞 and an 𝔞-bimodule M over 1_𝒰.
 */
Bimodule restrictBimodule(const GradedFunctor& f, const Bimodule& m);

/**
 * The zero bimodule with the given carrier.
 */
Bimodule zeroBimodule(const GradedPtr& left, const GradedPtr& right, const SetBifunctor& carrier);

/* ------------------------------------------------------------------ */

/**
 * M ⊗_𝔟 N over S∘T.  Each space is the quotient of the sum of the
 * M_s(B, A) ⊗ N_t(C, B) over its class by the relations
 * mb ⊗ n − m ⊗ bn; its basis is the set of pivot-free ambient coordinates.
 */
struct TensorProduct
{
    struct Summand
    {
        SpaceId first;    // M space
        SpaceId second;   // N space
        std::size_t width;  // dim of the N space
        std::size_t offset;
    };

    Bimodule module;
    BifunctorComposite composite;
    std::vector<std::vector<Summand> > summands;   // per tensor space
    std::vector<QuotientSpace> quotients;
    std::map<std::pair<SpaceId, SpaceId>, std::pair<SpaceId, std::size_t> > index;   // ↦ (space, summand)

    /**
     * Space and coordinates of the class of x ⊗ y.
     */
    std::pair<SpaceId, QVector> classOf(SpaceId first, const SparseVector& x, SpaceId second, const SparseVector& y) const;
};

TensorProduct tensor(const Bimodule& m, const Bimodule& n);

/**
 * Hom_𝔟(M, N) for 𝔞-S-𝔟-bimodules: an 𝔞-bimodule over 1_𝒰 whose space
 * over u: U → U′, A, A′ is the space of right 𝔟-linear families
 * M_s(B, A) → N_{us}(B, A′).  Hom_𝔞°(M, N) is the 𝔟-bimodule over 1_𝒱 of
 * left 𝔞-linear families M_s(B′, A) → N_{sv}(B, A).
 */
struct HomBimodule
{
    struct Block
    {
        SpaceId source;   // in M
        SpaceId target;   // in N
        std::size_t rows;
        std::size_t cols;
        std::size_t offset;
    };

    Bimodule module;
    std::vector<std::vector<Block> > blocks;        // per space, in variable order
    std::vector<std::vector<QVector> > basis;       // per space, variable vectors
    std::vector<std::size_t> variables;             // per space

    /**
     * The component on the M space q of the element of space p with the
     * given coordinates, as a matrix dim(target) x dim(q).
     */
    QMatrix component(SpaceId p, const QVector& coords, SpaceId q) const;
};

HomBimodule homBimodule(const Bimodule& m, const Bimodule& n);
HomBimodule homOpBimodule(const Bimodule& m, const Bimodule& n);

/**
 * The natural map 1_𝔞 → Hom_𝔟(M, M): coordinates of a ↦ (m ↦ am) for
 * every basis element of every hom space of 𝔞, as dim(H_h) x dim(𝔞_h)
 * matrices indexed by hom id.
 */
std::vector<QMatrix> actionMap(const Bimodule& m, const HomBimodule& endo);

/**
 * Basis of the space of bimodule morphisms M → N for bimodules over the
 * same graded categories, where carrierMap sends elements of M's carrier
 * to elements of N's carrier.  Each vector lists per-space matrices.
 */
std::vector<std::vector<QMatrix> > morphismSpace(const Bimodule& m, const Bimodule& n,
                                                 const std::vector<std::size_t>& carrierMap);

/* ------------------------------------------------------------------ */

/**
 * 0 → M_𝒵 → M → M_𝒱 → 0 for an 𝔞-bimodule M over 1_𝒰 and a decomposition
 * Mor(𝒰) = 𝒵 ⊔ Mor(𝒱).  Both ends share M's space indexing with zero
 * spaces outside their support.
 */
struct SupportSplit
{
    Bimodule supported;              // M_𝒵
    Bimodule quotient;               // M_𝒱
    std::vector<QMatrix> inclusion;  // per space
    std::vector<QMatrix> projection;
};

SupportSplit supportSplit(const Bimodule& m, const std::vector<char>& ideal, const Subcategory& complement);

/**
 * The bimodule on the morphisms in a set, zero elsewhere (actions
 * restricted).  Throws Error("NotAnIdeal") if the set is not closed.
 */
Bimodule supportedOn(const Bimodule& m, const std::vector<char>& ideal);

/* ------------------------------------------------------------------ */

/**
 * 𝔠 = 𝔟 →_M 𝔞 over 𝒲 = 𝒱 →_S 𝒰.  Objects: those of 𝔟, then of 𝔞.
 */
struct ArrowGraded
{
    GradedPtr category;
    ArrowBase base;
    GradedFunctor fromRight;   // 𝔟 → 𝔠
    GradedFunctor fromLeft;    // 𝔞 → 𝔠
    std::vector<char> crossIdeal;
};

ArrowGraded arrowCategory(const Bimodule& m);

}   // namespace mgc

#endif
