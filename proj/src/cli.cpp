/**
 * The mgc command set.
 */

#include "mgc/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <CLI11.hpp>
#include "mgc/descent.hpp"
#include "mgc/io.hpp"

namespace mgc {

namespace {

struct Settings
{
    std::vector<std::string> inputs;
    std::size_t maxDegree = 3;
    std::size_t coverDepth = 0;   // 0: 2·|Mor|
    std::uint64_t seed = 0;
    std::string convention = "standard";
};

/**
 * Failures of an asserted property, as opposed to bad input.
 */
bool isPropertyFailure(const std::string& code)
{
    static const std::set<std::string> codes = {"CoherenceFailed", "CocycleViolated", "CompositionIllDefined",
                                                "AssociativityFailed", "NotACover", "CoverCheckFailed",
                                                "NotAComplex"};
    return codes.count(code) > 0;
}

class Report
{
    public:
        Report(std::ostream& out, std::string command, const Settings& s)
            : out_(out), command_(std::move(command)), settings_(s)
        {
        }

        void text(const std::string& line) { out_ << line << "\n"; }

        void json(Json j)
        {
            Json line;
            line["command"] = command_;
            for (auto& [k, v] : j.items())
                line[k] = v;
            out_ << line.dump() << "\n";
        }

        void header(std::optional<std::size_t> coverDepth = std::nullopt)
        {
            Json j;
            j["convention"] = settings_.convention;
            j["max_degree"] = settings_.maxDegree;
            if (coverDepth)
                j["cover_depth"] = *coverDepth;
            else if (settings_.coverDepth)
                j["cover_depth"] = settings_.coverDepth;
            else
                j["cover_depth"] = nullptr;   // no ∞-cover check
            j["seed"] = settings_.seed;
            json(j);
        }

        /**
         * Per-degree verdicts, failures and the long exact sequence.
         */
        bool exactness(const ExactnessReport& r)
        {
            for (const DegreeVerdict& d : r.degrees)
            {
                Json j{{"label", r.label}, {"degree", d.degree}, {"exact", d.verdict.exact}};
                if (!d.verdict.exact)
                    j["reason"] = d.verdict.reason;
                json(j);
            }
            for (const std::string& f : r.failures)
                json({{"label", r.label}, {"failure", f}});
            if (r.les)
            {
                Json terms = Json::array();
                for (std::size_t i = 0; i < r.les->terms.size(); ++i)
                    terms.push_back({{"term", r.les->terms[i]}, {"dim", r.les->dims[i]}});
                Json j{{"label", r.label}, {"long_exact_sequence", terms}, {"exact", r.les->verdict.exact}};
                if (!r.les->verdict.exact)
                    j["reason"] = r.les->verdict.reason;
                json(j);
            }
            std::size_t first = r.degrees.empty() ? 0 : r.degrees.front().degree;
            std::size_t last = r.degrees.empty() ? 0 : r.degrees.back().degree;
            text("exact: " + std::string(r.exact() ? "yes" : "no") + " (degrees " + std::to_string(first) + ".." +
                 std::to_string(last) + ")");
            for (const std::string& f : r.failures)
                text("  " + f);
            return r.exact();
        }

    private:
        std::ostream& out_;
        std::string command_;
        const Settings& settings_;
};

class Commands
{
    public:
        Commands(const Workspace& w, const Settings& s) : w_(w), s_(s) {}

        SignConvention convention() const
        {
            return s_.convention == "flipped" ? SignConvention::Flipped : SignConvention::Standard;
        }

        std::size_t depthFor(const FinCat& c) const { return s_.coverDepth ? s_.coverDepth : 2 * c.morphismCount(); }

        const CatPtr& category(const std::string& name) const
        {
            auto it = w_.categories.find(name);
            if (it != w_.categories.end())
                return it->second;
            auto g = w_.graded.find(name);
            if (g != w_.graded.end())
                return g->second->base();
            throw Error("UnknownReference", "no category named '" + name + "'");
        }

        const GradedPtr& graded(const std::string& name) const
        {
            auto it = w_.graded.find(name);
            if (it == w_.graded.end())
                throw Error("UnknownReference", "no graded category named '" + name + "'");
            return it->second;
        }

        const GradedFunctor& gradedFunctor(const std::string& name) const
        {
            auto it = w_.gradedFunctors.find(name);
            if (it == w_.gradedFunctors.end())
                throw Error("UnknownReference", "no graded functor named '" + name + "'");
            return it->second;
        }

        const Functor& functor(const std::string& name) const
        {
            auto it = w_.functors.find(name);
            if (it == w_.functors.end())
                throw Error("UnknownReference", "no functor named '" + name + "'");
            return it->second;
        }

        const Bimodule& bimodule(const std::string& name) const
        {
            auto it = w_.bimodules.find(name);
            if (it == w_.bimodules.end())
                throw Error("UnknownReference", "no bimodule named '" + name + "'");
            return it->second;
        }

        const DiagramDecl& diagram(const std::string& name) const
        {
            auto it = w_.diagrams.find(name);
            if (it == w_.diagrams.end())
                throw Error("UnknownReference", "no diagram named '" + name + "'");
            return it->second;
        }

        const std::vector<std::string>& cover(const std::string& name) const
        {
            auto it = w_.covers.find(name);
            if (it == w_.covers.end())
                throw Error("UnknownReference", "no cover named '" + name + "'");
            return it->second;
        }

        std::vector<GradedFunctor> gradedCover(const std::string& name) const
        {
            std::vector<GradedFunctor> out;
            for (const std::string& m : cover(name))
            {
                if (!w_.gradedFunctors.count(m))
                    throw Error("UnknownReference", "cover '" + name + "' is not made of graded functors");
                out.push_back(w_.gradedFunctors.at(m));
            }
            return out;
        }

        std::vector<Functor> baseCover(const std::string& name) const
        {
            std::vector<Functor> out;
            for (const std::string& m : cover(name))
                out.push_back(w_.functors.count(m) ? w_.functors.at(m) : w_.gradedFunctors.at(m).sharpFunctor());
            return out;
        }

        std::vector<char> ideal(const FinCat& c, const std::string& list) const
        {
            std::vector<char> out(c.morphismCount(), 0);
            std::stringstream in(list);
            std::string name;
            while (std::getline(in, name, ','))
            {
                auto m = c.findMorphism(name);
                if (!m)
                    throw Error("UnknownReference", "no morphism '" + name + "'");
                out[*m] = 1;
            }
            return out;
        }

        /**
         * The chain cover of a graded category: restrictions along the chain
         * subcategories of its base.
         */
        std::vector<GradedFunctor> chainFamily(const GradedPtr& a) const
        {
            std::vector<GradedFunctor> out;
            for (const Subcategory& piece : chainCover(a->base()).pieces)
                out.push_back(restrictGraded(a, embedSubcategory(piece).inclusion).functor);
            return out;
        }

        int validate(Report& r, const std::string& write) const
        {
            r.header();
            std::size_t count = 0;
            for (const auto& [kind, list] : w_.canonical)
                for (const Json& d : list)
                {
                    r.json({{"kind", kind}, {"name", d.at("name")}, {"valid", true}});
                    ++count;
                }
            if (!write.empty())
            {
                std::ofstream file(write);
                if (!file)
                    throw Error("ParseError", write + ": cannot write");
                file << saveWorkspace(w_);
            }
            r.text("valid: " + std::to_string(count) + " declarations");
            return 0;
        }

        int nerveSizes(Report& r, const std::string& name) const
        {
            r.header();
            CatPtr c = w_.graded.count(name) ? w_.graded.at(name)->sharp() : category(name);
            std::string line = "nerve:";
            for (std::size_t k = 0; k <= s_.maxDegree; ++k)
            {
                std::size_t n = nerveSize(*c, k);
                r.json({{"degree", k}, {"size", n}});
                line += " " + std::to_string(n);
            }
            r.text(line);
            return 0;
        }

        int coverCheck(Report& r, const std::string& name, std::optional<std::size_t> degree) const
        {
            std::vector<Functor> family = baseCover(name);
            std::size_t depth = depthFor(*family.front().target());
            r.header(depth);
            CoverVerdict v = isNCover(family, degree, depth);
            Json j{{"cover", name}, {"is_cover", v.isCover}, {"infinite", v.infinite},
                   {"degree_checked", v.degreeChecked}, {"stabilized", v.stabilized}};
            if (v.stabilized)
                j["stable_degree"] = v.stableDegree;
            if (v.witness)
                j["witness"] = simplexName(*family.front().target(), *v.witness);
            r.json(j);
            std::string kind = degree ? std::to_string(*degree) + "-cover" : "∞-cover";
            r.text(kind + ": " + (v.isCover ? "yes" : "no") +
                   (v.witness ? " (missing " + simplexName(*family.front().target(), *v.witness) + ")" : ""));
            return v.isCover ? 0 : 1;
        }

        int restrictCmd(Report& r, const std::string& a, const std::string& phi) const
        {
            r.header();
            GradedMap m = restrictGraded(graded(a), functor(phi));
            bool cartesian = m.functor.isCartesian();
            r.json({{"objects", m.category->objectCount()}, {"homs", m.category->homCount()}, {"cartesian", cartesian}});
            r.text("restricted: " + std::to_string(m.category->objectCount()) + " objects, " +
                   std::to_string(m.category->homCount()) + " hom spaces");
            r.text("cartesian: " + std::string(cartesian ? "yes" : "no"));
            return cartesian ? 0 : 1;
        }

        int glue(Report& r, const std::string& a, const std::string& coverName) const
        {
            r.header();
            std::vector<Functor> family;
            for (const std::string& m : cover(coverName))
            {
                if (!w_.functors.count(m))
                    throw Error("UnknownReference", "cover '" + coverName + "' is not made of functors");
                family.push_back(w_.functors.at(m));
            }
            DescentDatum d = descentFromRestriction(graded(a), family);
            std::optional<CocycleFailure> bad = checkCocycle(d);
            if (bad)
            {
                r.json({{"cocycle", false}, {"triple", {bad->i, bad->j, bad->k}}, {"detail", bad->detail}});
                r.text("cocycle: no");
                return 1;
            }
            GlueResult g = glueDescent(d);
            bool cartesian = true;
            for (const GradedFunctor& f : g.comparisons)
                cartesian = cartesian && f.isCartesian();
            std::optional<std::string> diff = structuralDifference(*g.glued, *graded(a));
            std::size_t dimsGlued = 0;
            std::size_t dimsOriginal = 0;
            for (HomId h = 0; h < g.glued->homCount(); ++h)
                dimsGlued += g.glued->dim(h);
            for (HomId h = 0; h < graded(a)->homCount(); ++h)
                dimsOriginal += graded(a)->dim(h);
            bool same = g.glued->objectCount() == graded(a)->objectCount() && dimsGlued == dimsOriginal;
            r.json({{"cocycle", true}, {"glued_objects", g.glued->objectCount()}, {"glued_dim", dimsGlued},
                    {"comparisons_cartesian", cartesian}, {"structurally_identical", !diff}});
            r.text("glued: " + std::to_string(g.glued->objectCount()) + " objects, total dimension " +
                   std::to_string(dimsGlued));
            r.text("comparisons cartesian: " + std::string(cartesian ? "yes" : "no"));
            return cartesian && same ? 0 : 1;
        }

        static std::size_t totalDim(const Bimodule& m)
        {
            std::size_t n = 0;
            for (SpaceId p = 0; p < m.spaceCount(); ++p)
                n += m.dim(p);
            return n;
        }

        int tensorCmd(Report& r, const std::string& left, const std::string& right) const
        {
            r.header();
            TensorProduct t = tensor(bimodule(left), bimodule(right));
            bool valid = bimoduleViolations(t.module).empty();
            r.json({{"spaces", t.module.spaceCount()}, {"dim", totalDim(t.module)}, {"valid", valid}});
            r.text("tensor: " + std::to_string(t.module.spaceCount()) + " spaces, total dimension " +
                   std::to_string(totalDim(t.module)));
            return valid ? 0 : 1;
        }

        int homCmd(Report& r, const std::string& left, const std::string& right, bool op) const
        {
            r.header();
            HomBimodule h = op ? homOpBimodule(bimodule(left), bimodule(right)) : homBimodule(bimodule(left), bimodule(right));
            bool valid = bimoduleViolations(h.module).empty();
            r.json({{"spaces", h.module.spaceCount()}, {"dim", totalDim(h.module)}, {"valid", valid}, {"op", op}});
            r.text(std::string(op ? "hom-op" : "hom") + ": " + std::to_string(h.module.spaceCount()) +
                   " spaces, total dimension " + std::to_string(totalDim(h.module)));
            return valid ? 0 : 1;
        }

        int hhOf(Report& r, const HochschildComplex& c, const std::string& label) const
        {
            HochschildDims h = hhDims(c);
            bool complex = true;
            for (std::size_t n = 0; n + 1 < c.segment().d.size(); ++n)
            {
                bool zero = (c.differential(n + 1) * c.differential(n)).isZero();
                complex = complex && zero;
            }
            for (std::size_t n = 0; n < h.dims.size(); ++n)
                r.json({{"label", label}, {"degree", n}, {"cochains", c.dim(n)}, {"hh", h.dims[n]},
                        {"truncated", h.topFlagged && n + 1 == h.dims.size()}});
            r.json({{"label", label}, {"d_squared_zero", complex}});
            r.text("HH: " + formatDims(h));
            return complex ? 0 : 1;
        }

        int arrow(Report& r, const std::string& m) const
        {
            r.header();
            ArrowGraded a = arrowCategory(bimodule(m));
            r.json({{"objects", a.category->objectCount()}, {"homs", a.category->homCount()}});
            r.text("arrow category: " + std::to_string(a.category->objectCount()) + " objects, " +
                   std::to_string(a.category->homCount()) + " hom spaces");
            return hhOf(r, buildComplex(a.category, s_.maxDegree, convention()), "arrow");
        }

        int recognize(Report& r, const std::string& name, const std::string& idealList, const std::string& decomp) const
        {
            r.header();
            CatPtr c = category(name);
            std::vector<char> z;
            if (!decomp.empty())
            {
                auto it = w_.decompositions.find(decomp);
                if (it == w_.decompositions.end())
                    throw Error("UnknownReference", "no decomposition named '" + decomp + "'");
                z = it->second.ideal;
            }
            else
                z = ideal(*c, idealList);
            ArrowRecognition a = recognizeArrow(c, z, true);
            Json j{{"arrow", a.ok}};
            if (!a.ok)
            {
                j["failure"] = a.failure;
                j["detail"] = a.detail;
            }
            r.json(j);
            r.text("arrow: " + std::string(a.ok ? "yes" : "no (" + a.failure + ": " + a.detail + ")"));
            return a.ok ? 0 : 1;
        }

        int hh(Report& r, const std::string& a, const std::string& m) const
        {
            r.header();
            if (!m.empty())
                return hhOf(r, buildComplex(bimodule(m), s_.maxDegree, convention()), m);
            return hhOf(r, buildComplex(graded(a), s_.maxDegree, convention()), a);
        }

        int sheaf(Report& r, const std::string& coverName, const std::string& diagramName) const
        {
            if (!diagramName.empty() && w_.diagrams.count(diagramName))
            {
                ChainCoverReport c = chainCoverMv(diagram(diagramName).pseudo, s_.maxDegree, convention());
                r.header();
                return r.exactness(c.sheaf) ? 0 : 1;
            }
            std::vector<GradedFunctor> family = diagramName.empty() ? gradedCover(coverName) : chainFamily(graded(diagramName));
            r.header();
            HochschildComplex c = buildComplex(family.front().target(), s_.maxDegree, convention());
            return r.exactness(sheafCheck(c, family)) ? 0 : 1;
        }

        int mv(Report& r, const std::string& coverName, const std::string& diagramName) const
        {
            if (!diagramName.empty() && w_.diagrams.count(diagramName))
                return chainMv(r, diagramName);
            std::vector<GradedFunctor> family = diagramName.empty() ? gradedCover(coverName) : chainFamily(graded(diagramName));
            if (family.size() != 2)
                throw Error("NotTwoPieces", "Mayer-Vietoris needs a cover with two members, got " +
                                                std::to_string(family.size()));
            std::size_t depth = depthFor(*family.front().target()->sharp());
            r.header(depth);
            HochschildComplex c = buildComplex(family.front().target(), s_.maxDegree, convention());
            return r.exactness(mayerVietoris(c, family[0], family[1], depth)) ? 0 : 1;
        }

        int support(Report& r, const std::string& f) const
        {
            r.header();
            const GradedFunctor& F = gradedFunctor(f);
            HochschildComplex c = buildComplex(F.target(), s_.maxDegree, convention());
            SupportComplex s = supportComplex(F, c);
            Restriction res = restrictIntrinsic(F, c);
            ShortExactSequence seq;
            seq.sub = s.segment;
            seq.middle = c.segment();
            seq.quotient = res.target.segment();
            seq.f = s.inclusion;
            seq.g = res.map.maps;
            seq.names = {"C_supp", "C(a)", "C(b)"};
            ExactnessReport rep = checkShortExact(seq, "support", true, s_.maxDegree);
            std::vector<std::size_t> dims = cohomologyDims(s.segment);
            std::string line = "support HH:";
            for (std::size_t n = 0; n < dims.size(); ++n)
            {
                r.json({{"label", "support"}, {"degree", n}, {"cochains", s.segment.dims[n]}, {"hh", dims[n]}});
                line += " " + std::to_string(dims[n]);
            }
            r.text(line);
            return r.exactness(rep) ? 0 : 1;
        }

        int localize(Report& r, const std::string& a, const std::string& decomp) const
        {
            r.header();
            auto it = w_.decompositions.find(decomp);
            if (it == w_.decompositions.end())
                throw Error("UnknownReference", "no decomposition named '" + decomp + "'");
            HochschildComplex c = buildComplex(graded(a), s_.maxDegree, convention());
            return r.exactness(localizationCheck(c, it->second.ideal, it->second.complement)) ? 0 : 1;
        }

        int triangle(Report& r, const std::string& m) const
        {
            r.header();
            TriangleReport t = connectingMaps(bimodule(m), s_.maxDegree, convention());
            auto line = [](const std::vector<std::size_t>& v) {
                std::string s;
                for (std::size_t x : v)
                    s += (s.empty() ? "" : " ") + std::to_string(x);
                return s;
            };
            r.json({{"hh_arrow", t.hhArrow}, {"hh_right", t.hhRight}, {"hh_left", t.hhLeft}, {"ext", t.ext}});
            r.text("HH(arrow): " + line(t.hhArrow));
            r.text("HH(right): " + line(t.hhRight));
            r.text("HH(left): " + line(t.hhLeft));
            r.text("Ext: " + line(t.ext));
            return r.exactness(t.report) ? 0 : 1;
        }

        int censor(Report& r, const std::string& a, const std::string& sub) const
        {
            r.header();
            auto it = w_.subcategories.find(sub);
            if (it == w_.subcategories.end())
                throw Error("UnknownReference", "no subcategory named '" + sub + "'");
            CensoringVerdict v = censoringCheck(buildComplex(graded(a), s_.maxDegree, convention()), it->second);
            Json j{{"censoring", v.censoring}, {"bijective", v.bijective}};
            if (!v.censoring)
                j["witness"] = v.witness;
            r.json(j);
            r.text("censoring: " + std::string(v.censoring ? "yes" : "no (" + v.witness + ")"));
            if (v.censoring)
                r.text("restriction bijective: " + std::string(v.bijective ? "yes" : "no"));
            return v.censoring && v.bijective ? 0 : 1;
        }

        int groth(Report& r, const std::string& p) const
        {
            r.header();
            Grothendieck g = grothendieck(diagram(p).pseudo);
            r.json({{"base_objects", g.category->base()->objectCount()},
                    {"base_morphisms", g.category->base()->morphismCount()},
                    {"objects", g.category->objectCount()},
                    {"homs", g.category->homCount()}});
            r.text("grothendieck: " + std::to_string(g.category->objectCount()) + " objects over " +
                   std::to_string(g.category->base()->objectCount()) + " base objects");
            return hhOf(r, buildComplex(g.category, s_.maxDegree, convention()), p);
        }

        int baseChangeCmd(Report& r, const std::string& p, const std::string& phi) const
        {
            r.header();
            Grothendieck g = grothendieck(diagram(p).pseudo);
            BaseChange b = baseChange(g, functor(phi));
            bool cartesian = b.functor.isCartesian();
            r.json({{"objects", b.total.category->objectCount()}, {"homs", b.total.category->homCount()},
                    {"cartesian", cartesian}});
            r.text("base change: " + std::to_string(b.total.category->objectCount()) + " objects");
            r.text("cartesian: " + std::string(cartesian ? "yes" : "no"));
            return cartesian ? 0 : 1;
        }

        int cstar(Report& r, const std::string& p, const std::string& anchorList) const
        {
            r.header();
            const PseudoFunctor& pf = diagram(p).pseudo;
            std::vector<ObjId> anchors;
            std::stringstream in(anchorList);
            std::string name;
            while (std::getline(in, name, ','))
            {
                auto x = pf.base->findObject(name);
                if (!x)
                    throw Error("UnknownReference", "no object '" + name + "'");
                anchors.push_back(*x);
            }
            CStarReport c = cstarDiagram(pf, anchors, s_.maxDegree, convention());
            for (const auto& [ij, cone] : c.products)
                r.json({{"anchors", {pf.base->objectName(anchors[ij.first]), pf.base->objectName(anchors[ij.second])}},
                        {"product", pf.base->objectName(cone.product)}});
            return r.exactness(c.report) ? 0 : 1;
        }

        int chainMv(Report& r, const std::string& p) const
        {
            ChainCoverReport c = chainCoverMv(diagram(p).pseudo, s_.maxDegree, convention());
            // the two-chain ∞-cover check runs at its default depth 2·|Mor|
            std::optional<std::size_t> depth;
            if (c.mayerVietoris)
                depth = 2 * grothendieck(diagram(p).pseudo).category->sharp()->morphismCount();
            r.header(depth);
            r.json({{"chains", c.cover.chains.size()}});
            bool ok = r.exactness(c.sheaf);
            if (c.mayerVietoris)
                ok = r.exactness(*c.mayerVietoris) && ok;
            return ok ? 0 : 1;
        }

        int compare(Report& r, const std::string& p) const
        {
            r.header();
            const DiagramDecl& d = diagram(p);
            if (!d.functorial)
                throw Error("NotFunctorial", "'" + p + "' is not a functorial diagram");
            ComparisonReport c = comparisonCheck(*d.functorial, s_.maxDegree, convention());
            const FinCat& base = *d.functorial->base;
            for (ObjId x = 0; x < c.objects.size(); ++x)
            {
                std::string line = base.objectName(x) + ":";
                for (const ComparisonDegree& cd : c.objects[x])
                {
                    r.json({{"object", base.objectName(x)}, {"degree", cd.degree}, {"hh_total", cd.total},
                            {"hh_fiber", cd.fiber}, {"isomorphism", cd.isomorphism}});
                    line += " " + std::to_string(cd.total) + (cd.isomorphism ? "≅" : "≠") + std::to_string(cd.fiber);
                }
                r.text(line);
            }
            for (const ComparisonSquare& sq : c.squares)
            {
                Json commutes = Json::array();
                for (char ok : sq.commutes)
                    commutes.push_back(ok != 0);
                r.json({{"morphism", base.morphismName(sq.morphism)}, {"commutes", commutes}});
            }
            r.text("comparison: " + std::string(c.holds() ? "yes" : "no") + " (degrees 0.." +
                   std::to_string(s_.maxDegree == 0 ? 0 : s_.maxDegree - 1) + ")");
            return c.holds() ? 0 : 1;
        }

    private:
        const Workspace& w_;
        const Settings& s_;
};

std::vector<std::string> dataFiles(const std::string& dir)
{
    std::vector<std::string> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir))
        if (entry.path().extension() == ".json")
            out.push_back(entry.path().string());
    std::sort(out.begin(), out.end());
    return out;
}

}   // namespace

int runCli(const std::vector<std::string>& args, const std::string& dataDir, std::ostream& out, std::ostream& err)
{
    Settings s;
    CLI::App app{"Map-graded linear categories over Q", "mgc"};
    app.require_subcommand(1);
    app.add_option("--input,-i", s.inputs, "workspace JSON files (default: the bundled fixtures)");
    app.add_option("--max-degree", s.maxDegree, "truncation degree N")->capture_default_str();
    app.add_option("--cover-depth", s.coverDepth, "depth bound for ∞-cover checks (default 2·|Mor|)");
    app.add_option("--seed", s.seed, "seed recorded in the report")->capture_default_str();
    app.add_option("--convention", s.convention, "inner-face sign convention")
        ->check(CLI::IsMember({"standard", "flipped"}))
        ->capture_default_str();

    std::string cat, graded, functor, cover, bimodule, left, right, diagram, ideal, decomposition, subcategory, anchors,
        write;
    std::optional<std::size_t> degree;
    bool op = false;
    auto sub = [&](const std::string& name, const std::string& help) {
        CLI::App* c = app.add_subcommand(name, help);
        c->fallthrough();
        return c;
    };
    CLI::App* validate = sub("validate", "load and validate the workspace");
    validate->add_option("--write", write, "write the canonical workspace to this file");
    CLI::App* nerve = sub("nerve", "nerve sizes up to the truncation degree");
    nerve->add_option("--cat", cat)->required();
    CLI::App* coverCmd = sub("cover", "n-cover or ∞-cover check");
    coverCmd->add_option("--cover", cover)->required();
    coverCmd->add_option("--degree", degree, "n (default: ∞-cover)");
    CLI::App* restrict = sub("restrict", "restriction along a base functor");
    restrict->add_option("--graded", graded)->required();
    restrict->add_option("--functor", functor)->required();
    CLI::App* glue = sub("glue", "restrict along a cover and glue back");
    glue->add_option("--graded", graded)->required();
    glue->add_option("--cover", cover)->required();
    CLI::App* tensorCmd = sub("tensor", "tensor product of bimodules");
    tensorCmd->add_option("--left", left)->required();
    tensorCmd->add_option("--right", right)->required();
    CLI::App* hom = sub("hom", "Hom bimodule");
    hom->add_option("--left", left)->required();
    hom->add_option("--right", right)->required();
    hom->add_flag("--op", op, "Hom over the opposite of the left category");
    CLI::App* arrow = sub("arrow", "arrow category of a bimodule");
    arrow->add_option("--bimodule", bimodule)->required();
    CLI::App* recognize = sub("recognize-arrow", "recognize an arrow category along a thin ideal");
    recognize->add_option("--cat", cat)->required();
    recognize->add_option("--ideal", ideal, "comma-separated morphisms");
    recognize->add_option("--decomposition", decomposition);
    CLI::App* hh = sub("hh", "Hochschild cohomology dimensions");
    hh->add_option("--cat", graded)->required();
    hh->add_option("--bimodule", bimodule, "coefficients (default: the identity bimodule)");
    CLI::App* sheafCmd = sub("sheaf-check", "equalizer exactness over a cover");
    sheafCmd->add_option("--cover", cover);
    sheafCmd->add_option("--diagram", diagram, "graded category or diagram: use the chain cover");
    CLI::App* mv = sub("mv", "Mayer-Vietoris sequence");
    mv->add_option("--cover", cover);
    mv->add_option("--diagram", diagram, "graded category or diagram: use the chain cover");
    CLI::App* support = sub("support", "support complex of a graded functor");
    support->add_option("--functor", functor)->required();
    CLI::App* localize = sub("localize", "localization sequences of a decomposition");
    localize->add_option("--cat", graded)->required();
    localize->add_option("--decomposition", decomposition)->required();
    CLI::App* triangle = sub("triangle", "connecting maps of an arrow category");
    triangle->add_option("--bimodule", bimodule)->required();
    CLI::App* censor = sub("censor", "censoring subcategory check");
    censor->add_option("--cat", graded)->required();
    censor->add_option("--subcategory", subcategory)->required();
    CLI::App* grothCmd = sub("groth", "Grothendieck construction of a diagram");
    grothCmd->add_option("--diagram", diagram)->required();
    CLI::App* baseChangeCmd = sub("base-change", "base change of a diagram along a functor");
    baseChangeCmd->add_option("--diagram", diagram)->required();
    baseChangeCmd->add_option("--functor", functor)->required();
    CLI::App* cstar = sub("cstar", "sheaf property over anchor slices");
    cstar->add_option("--diagram", diagram)->required();
    cstar->add_option("--anchors", anchors, "comma-separated base objects")->required();
    CLI::App* chainMv = sub("chain-mv", "sheaf and Mayer-Vietoris checks over the chain cover");
    chainMv->add_option("--diagram", diagram)->required();
    CLI::App* compare = sub("compare", "comparison of fibers with slice restrictions");
    compare->add_option("--diagram", diagram)->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp& e)
    {
        out << app.help();
        return 0;
    }
    catch (const CLI::ParseError& e)
    {
        err << "usage error: " << e.what() << "\n";
        return 2;
    }

    CLI::App* chosen = app.get_subcommands().front();
    std::string command = chosen->get_name();
    Workspace w;
    try
    {
        w = loadWorkspace(s.inputs.empty() ? dataFiles(dataDir) : s.inputs);
    }
    catch (const Error& e)
    {
        err << e.what() << "\n";
        return 2;
    }

    Report r(out, command, s);
    Commands c(w, s);
    try
    {
        if (command == "validate")
            return c.validate(r, write);
        if (command == "nerve")
            return c.nerveSizes(r, cat);
        if (command == "cover")
            return c.coverCheck(r, cover, degree);
        if (command == "restrict")
            return c.restrictCmd(r, graded, functor);
        if (command == "glue")
            return c.glue(r, graded, cover);
        if (command == "tensor")
            return c.tensorCmd(r, left, right);
        if (command == "hom")
            return c.homCmd(r, left, right, op);
        if (command == "arrow")
            return c.arrow(r, bimodule);
        if (command == "recognize-arrow")
            return c.recognize(r, cat, ideal, decomposition);
        if (command == "hh")
            return c.hh(r, graded, bimodule);
        if ((command == "sheaf-check" || command == "mv") && cover.empty() == diagram.empty())
        {
            err << "usage error: give exactly one of --cover and --diagram\n";
            return 2;
        }
        if (command == "sheaf-check")
            return c.sheaf(r, cover, diagram);
        if (command == "mv")
            return c.mv(r, cover, diagram);
        if (command == "support")
            return c.support(r, functor);
        if (command == "localize")
            return c.localize(r, graded, decomposition);
        if (command == "triangle")
            return c.triangle(r, bimodule);
        if (command == "censor")
            return c.censor(r, graded, subcategory);
        if (command == "groth")
            return c.groth(r, diagram);
        if (command == "base-change")
            return c.baseChangeCmd(r, diagram, functor);
        if (command == "cstar")
            return c.cstar(r, diagram, anchors);
        if (command == "chain-mv")
            return c.chainMv(r, diagram);
        return c.compare(r, diagram);
    }
    catch (const Error& e)
    {
        err << command << ": " << e.what() << "\n";
        r.json({{"error", e.code()}, {"detail", e.detail()}});
        return isPropertyFailure(e.code()) ? 1 : 2;
    }
}

}   // namespace mgc
