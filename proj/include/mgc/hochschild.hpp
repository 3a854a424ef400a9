/**
 * Hochschild cochain complexes of graded categories with bimodule
 * coefficients, restriction along graded functors, support complexes and
 * the exact sequences relating them.
 *
 * C^n(𝔞, M) is the product over n-simplices (u, A) of the nerve of 𝔞♯ of
 * Hom(𝔞_{u_{n-1}}(A_{n-1}, A_n) ⊗ ... ⊗ 𝔞_{u_0}(A_0, A_1), M_{|u|}(A_0, A_n)).
 * Coordinates are ordered by simplex, then tensor multi-index (the factor
 * of u_{n-1} most significant), then target basis index.
 *
 * Standard convention:
 *     (dφ)(a_n, ..., a_0) = a_n·φ(a_{n-1}, ..., a_0)
 *                         + Σ_i (−1)^{n−i} φ(..., a_{i+1}a_i, ...)
 *                         + (−1)^{n+1} φ(a_n, ..., a_1)·a_0.
 * The flipped convention negates every face, so every inner face changes
 * sign and d² = 0 still holds.  The shift [1] negates differentials.
 */

#ifndef MGC_HOCHSCHILD_HPP
#define MGC_HOCHSCHILD_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>
#include "mgc/bimodule.hpp"

namespace mgc {

enum class SignConvention
{
    Standard,
    Flipped
};

std::string conventionName(SignConvention c);

/**
 * One simplex block of C^n.
 */
struct CochainBlock
{
    Simplex simplex;            // in the nerve of 𝔞♯
    SpaceId target;             // M_{|u|}(A_0, A_n)
    std::vector<std::size_t> factorDims;   // dim 𝔞_{u_0}, ..., dim 𝔞_{u_{n-1}}
    std::size_t inputs = 1;     // product of factorDims
    std::size_t targetDim = 0;
    std::size_t offset = 0;

    std::size_t width() const { return inputs * targetDim; }
};

class HochschildComplex
{
    public:
        HochschildComplex() = default;

        const GradedPtr& source() const { return source_; }
        const Bimodule& coefficients() const { return coefficients_; }
        bool identityCoefficients() const { return identityCoefficients_; }
        SignConvention convention() const { return convention_; }

        /**
         * Cohomology is exact through this degree: degrees 0..N+1 are built
         * together with d^0..d^N.
         */
        std::size_t truncation() const { return truncation_; }

        std::size_t dim(std::size_t n) const { return segment_.dims[n]; }
        const QMatrix& differential(std::size_t n) const { return segment_.d[n]; }
        const ComplexSegment& segment() const { return segment_; }

        const std::vector<CochainBlock>& blocks(std::size_t n) const { return blocks_[n]; }

        /**
         * Index of the block of a simplex in its degree, or kNone.
         */
        std::size_t blockOf(const Simplex& s) const;

        /**
         * Coordinate of (simplex block, multi-index, target index); the
         * multi-index lists the factor of u_0 first.
         */
        std::size_t coordinate(std::size_t n, std::size_t block, const std::vector<std::size_t>& multi,
                               std::size_t t) const;

    private:
        friend HochschildComplex buildComplex(const Bimodule& m, std::size_t maxDegree, SignConvention convention);
        friend HochschildComplex buildComplex(const GradedPtr& a, std::size_t maxDegree, SignConvention convention);

        GradedPtr source_;
        Bimodule coefficients_;
        bool identityCoefficients_ = false;
        SignConvention convention_ = SignConvention::Standard;
        std::size_t truncation_ = 0;
        std::vector<std::vector<CochainBlock> > blocks_;
        std::map<std::pair<ObjId, std::vector<MorId> >, std::size_t> blockIndex_;
        ComplexSegment segment_;
};

/**
 * Throws Error("CoefficientMismatch") unless M is an 𝔞-bimodule over 1_𝒰.
 */
HochschildComplex buildComplex(const Bimodule& m, std::size_t maxDegree,
                               SignConvention convention = SignConvention::Standard);
HochschildComplex buildComplex(const GradedPtr& a, std::size_t maxDegree,
                               SignConvention convention = SignConvention::Standard);

struct HochschildDims
{
    std::vector<std::size_t> dims;   // degrees 0..N
    bool topFlagged = true;          // the truncation marker on degree N
};

HochschildDims hhDims(const HochschildComplex& c);

/**
 * "1 0 0 0*".
 */
std::string formatDims(const HochschildDims& h);

/* ------------------------------------------------------------------ */

/**
 * A degreewise map between segments; maps[n] goes from degree n of the
 * source to degree n + shift of the target.
 */
struct ChainMap
{
    std::vector<QMatrix> maps;
    std::size_t shift = 0;
};

/**
 * First degree n at which maps[n+1]·d_s^n ≠ ± d_t^{n+shift}·maps[n], with
 * sign (−1)^shift, or nullopt.
 */
std::optional<std::size_t> chainMapFailure(const ComplexSegment& source, const ComplexSegment& target,
                                           const ChainMap& f);

ComplexSegment directSum(const ComplexSegment& a, const ComplexSegment& b);

/* ------------------------------------------------------------------ */

struct Restriction
{
    HochschildComplex target;
    ChainMap map;
};

/**
 * (F*)^n: C^n(𝔞, M) → C^n(𝔟, F*M), φ ↦ φ ∘ F^{⊗n}, for F: 𝔟 → 𝔞.
 */
Restriction restrictComplex(const GradedFunctor& f, const HochschildComplex& c);

/**
 * φ ↦ F^{-1} ∘ φ ∘ F^{⊗n}: C(𝔞) → C(𝔟) for subcartesian F and the complex
 * of 𝔞 with coefficients 1_𝔞.  Throws Error("NotSubcartesian").
 */
Restriction restrictIntrinsic(const GradedFunctor& f, const HochschildComplex& c);

/* ------------------------------------------------------------------ */

/**
 * Cohomology of one degree of a segment with representatives chosen by
 * pivoting on the first free coordinate.
 */
class Cohomology
{
    public:
        Cohomology(const ComplexSegment& seg, std::size_t n);

        std::size_t dim() const { return representatives_.size(); }
        const std::vector<QVector>& representatives() const { return representatives_; }

        /**
         * Coordinates of the class of a cocycle; throws Error("NotACocycle").
         */
        QVector classOf(const QVector& cocycle) const;

    private:
        std::size_t ambient_;
        std::vector<QVector> representatives_;
        std::size_t boundaries_ = 0;
        SpanCoordinates span_{0, {}};
        QMatrix differential_;
};

/**
 * The matrix H^n(f) in representative coordinates.
 */
QMatrix inducedMap(const ComplexSegment& source, const ComplexSegment& target, const QMatrix& fn, std::size_t n,
                   std::size_t targetDegree);

struct DegreeVerdict
{
    std::size_t degree = 0;
    ExactnessVerdict verdict;
};

struct LongExactSequence
{
    std::vector<std::string> terms;
    std::vector<std::size_t> dims;
    std::vector<QMatrix> maps;
    std::vector<QMatrix> connecting;   // δ^n: H^n(C) → H^{n+1}(A)
    ExactnessVerdict verdict;
};

struct ExactnessReport
{
    std::string label;
    SignConvention convention = SignConvention::Standard;
    std::size_t truncation = 0;
    std::vector<DegreeVerdict> degrees;
    std::vector<std::string> failures;
    std::optional<LongExactSequence> les;

    bool exact() const;
};

/**
 * 0 → A → B → C → 0 degreewise, with f and g chain maps.
 */
struct ShortExactSequence
{
    ComplexSegment sub;
    ComplexSegment middle;
    ComplexSegment quotient;
    std::vector<QMatrix> f;
    std::vector<QMatrix> g;
    std::vector<std::string> names = {"A", "B", "C"};
};

/**
 * Degreewise exactness through the last degree of the quotient, chain map
 * checks and, if requested, the long exact cohomology sequence through
 * H^N(C) with connecting maps from the snake construction.  Positions are
 * checked up to the last one.
 */
ExactnessReport checkShortExact(const ShortExactSequence& s, const std::string& label, bool withLongSequence,
                                std::size_t lastDegree);

/* ------------------------------------------------------------------ */

/**
 * C_{𝒰∖𝒱♯}(𝔞, M) for a 1-injective subcartesian F: 𝔟 → 𝔞: the sub-product
 * over simplices outside the image of F♯, with its inclusion.  Throws
 * Error("Not1Injective") or Error("NotSubcartesian").
 */
struct SupportComplex
{
    ComplexSegment segment;
    std::vector<std::vector<std::size_t> > coordinates;   // per degree, into C(𝔞, M)
    std::vector<QMatrix> inclusion;
};

SupportComplex supportComplex(const GradedFunctor& f, const HochschildComplex& c);

/**
 * Equalizer 0 → C^n(𝔞, M) → Π C^n(𝔟_i) ⇉ Π_{i≤j} C^n(𝔟_i ×_𝔞 𝔟_j) for
 * degrees 0..N.  Throws Error("CoverCheckFailed") if the family is not an
 * N-cover at the graded level.
 */
ExactnessReport sheafCheck(const HochschildComplex& c, const std::vector<GradedFunctor>& family);

/**
 * 0 → C(𝔞) → C(𝔟_1) ⊕ C(𝔟_2) → C(𝔟_1 ×_𝔞 𝔟_2) → 0 and its long exact
 * sequence.  Throws Error("NotACover") or Error("Not1Injective").
 */
ExactnessReport mayerVietoris(const HochschildComplex& c, const GradedFunctor& f1, const GradedFunctor& f2,
                              std::size_t coverDepth = 0);

/**
 * Kernel-based and coefficient-based localization sequences for
 * Mor(𝒰) = 𝒵 ⊔ Mor(𝒱), matched by degreewise bijections that commute with
 * the differentials and the inclusions.  Throws Error("NotADecomposition").
 */
ExactnessReport localizationCheck(const HochschildComplex& c, const std::vector<char>& ideal,
                                  const Subcategory& complement);

/**
 * α: C(𝔞) → C(𝔠, (1_𝔠)_𝒮)[1] and β: C(𝔟) → C(𝔠, (1_𝔠)_𝒮)[1] for the arrow
 * category 𝔠 of M, with the sequence
 * ... → HH^i(𝔠) → HH^i(𝔟) ⊕ HH^i(𝔞) → Ext^i(M, M) → HH^{i+1}(𝔠) → ...
 * where Ext^i(M, M) = H^{i+1}(C(𝔠, (1_𝔠)_𝒮)).
 */
struct TriangleReport
{
    ExactnessReport report;
    ArrowGraded arrow;
    ChainMap alpha;
    ChainMap beta;
    std::vector<std::size_t> hhArrow;
    std::vector<std::size_t> hhRight;
    std::vector<std::size_t> hhLeft;
    std::vector<std::size_t> ext;   // Ext^0 .. Ext^{N-1}
};

TriangleReport connectingMaps(const Bimodule& m, std::size_t maxDegree,
                              SignConvention convention = SignConvention::Standard);

/**
 * The censoring condition for 𝒱 and, when it holds, bijectivity of the
 * restriction to 𝔞|_𝒱 in every degree.
 */
struct CensoringVerdict
{
    bool censoring = false;
    std::string witness;   // a nonzero hom outside 𝒱
    bool bijective = false;
};

CensoringVerdict censoringCheck(const HochschildComplex& c, const Subcategory& v);

}   // namespace mgc

#endif
