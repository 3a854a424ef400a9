/**
 * Descent data, cocycle checks and glueing.
 */

#include "mgc/descent.hpp"

#include <numeric>
#include <set>

namespace mgc {

namespace {

std::string uniqueName(std::set<std::string>& used, const std::string& name)
{
    std::string candidate = name;
    for (std::size_t k = 2; !used.insert(candidate).second; ++k)
        candidate = name + "#" + std::to_string(k);
    return candidate;
}

/**
 * Evaluation of the overlap isomorphisms on fiber objects and hom spaces
 * of the pieces.
 */
class Transport
{
    public:
        struct Result
        {
            ObjId source;   // in b_j
            ObjId target;
            QMatrix map;    // b_i hom -> b_j hom
        };

        explicit Transport(const DescentDatum& d) : d_(d)
        {
            for (const auto& [key, ov] : d.overlaps)
            {
                Index& ix = index_[key];
                for (MorId m = 0; m < ov.pullback.morphismPairs.size(); ++m)
                    ix.morphism[ov.pullback.morphismPairs[m]] = m;
                const GradedCat& left = *ov.left.category;
                for (ObjId o = 0; o < left.objectCount(); ++o)
                    ix.leftObject[{left.over(o), ov.left.functor.onObject(o)}] = o;
            }
        }

        Result hom(std::size_t i, std::size_t j, MorId vi, MorId vj, ObjId b, ObjId b2) const
        {
            const Overlap& ov = d_.overlaps.at({i, j});
            const Index& ix = index_.at({i, j});
            const GradedFunctor& rho = d_.rho.at({i, j});
            MorId m = ix.morphism.at({vi, vj});
            const FinCat& p = *ov.pullback.category;
            ObjId os = ix.leftObject.at({p.source(m), b});
            ObjId ot = ix.leftObject.at({p.target(m), b2});
            HomId h = ov.left.category->homId(m, os, ot);
            return {ov.right.functor.onObject(rho.onObject(os)), ov.right.functor.onObject(rho.onObject(ot)), rho.homMap(h)};
        }

        ObjId object(std::size_t i, std::size_t j, ObjId yi, ObjId yj, ObjId b) const
        {
            const FinCat& vi = *d_.cover[i].source();
            const FinCat& vj = *d_.cover[j].source();
            return hom(i, j, vi.identity(yi), vj.identity(yj), b, b).source;
        }

    private:
        struct Index
        {
            std::map<std::pair<MorId, MorId>, MorId> morphism;
            std::map<std::pair<ObjId, ObjId>, ObjId> leftObject;
        };

        const DescentDatum& d_;
        std::map<std::pair<std::size_t, std::size_t>, Index> index_;
};

/**
 * Preimages of every base morphism under every cover member.
 */
std::vector<std::vector<std::vector<MorId> > > liftsOf(const DescentDatum& d)
{
    std::vector<std::vector<std::vector<MorId> > > out(d.cover.size(),
                                                       std::vector<std::vector<MorId> >(d.base->morphismCount()));
    for (std::size_t i = 0; i < d.cover.size(); ++i)
        for (MorId v = 0; v < d.cover[i].source()->morphismCount(); ++v)
            out[i][d.cover[i].onMorphism(v)].push_back(v);
    return out;
}

}   // namespace

Overlap makeOverlap(const Functor& phiI, const GradedPtr& bI, const Functor& phiJ, const GradedPtr& bJ)
{
    Overlap out;
    out.pullback = pullbackCategory(phiI, phiJ);
    out.left = restrictGraded(bI, out.pullback.first);
    out.right = restrictGraded(bJ, out.pullback.second);
    return out;
}

DescentDatum descentFromRestriction(const GradedPtr& a, const std::vector<Functor>& cover)
{
    DescentDatum d;
    d.base = a->base();
    d.cover = cover;
    std::vector<GradedMap> restricted;
    for (const Functor& phi : cover)
    {
        restricted.push_back(restrictGraded(a, phi));
        d.pieces.push_back(restricted.back().category);
    }
    for (std::size_t i = 0; i < cover.size(); ++i)
    {
        for (std::size_t j = 0; j < cover.size(); ++j)
        {
            Overlap ov = makeOverlap(cover[i], d.pieces[i], cover[j], d.pieces[j]);
            const GradedCat& left = *ov.left.category;
            const GradedCat& right = *ov.right.category;
            std::map<std::pair<ObjId, ObjId>, ObjId> rightByGlobal;
            for (ObjId o = 0; o < right.objectCount(); ++o)
                rightByGlobal[{right.over(o), restricted[j].functor.onObject(ov.right.functor.onObject(o))}] = o;
            std::vector<ObjId> objMap;
            for (ObjId o = 0; o < left.objectCount(); ++o)
                objMap.push_back(rightByGlobal.at({left.over(o), restricted[i].functor.onObject(ov.left.functor.onObject(o))}));
            std::vector<QMatrix> maps;
            for (HomId h = 0; h < left.homCount(); ++h)
                maps.push_back(QMatrix::identity(left.dim(h)));
            d.rho[{i, j}] = GradedFunctor::make(ov.left.category, ov.right.category,
                                                Functor::identity(ov.pullback.category), objMap, maps);
            d.overlaps.emplace(std::make_pair(i, j), std::move(ov));
        }
    }
    return d;
}

std::optional<CocycleFailure> checkCocycle(const DescentDatum& d)
{
    Transport t(d);
    auto lifts = liftsOf(d);
    std::size_t n = d.cover.size();
    const FinCat& u = *d.base;
    for (std::size_t i = 0; i < n; ++i)
    {
        const GradedCat& b = *d.pieces[i];
        const FinCat& v = *d.cover[i].source();
        for (MorId m = 0; m < v.morphismCount(); ++m)
        {
            for (ObjId x : b.fiber(v.source(m)))
            {
                for (ObjId y : b.fiber(v.target(m)))
                {
                    Transport::Result r = t.hom(i, i, m, m, x, y);
                    if (r.source != x || r.target != y || r.map != QMatrix::identity(b.dim(b.homId(m, x, y))))
                        return CocycleFailure{i, i, i, "ρ_ii is not the identity over " + v.morphismName(m)};
                }
            }
        }
    }
    for (std::size_t i = 0; i < n; ++i)
    {
        const GradedCat& bi = *d.pieces[i];
        const FinCat& vi = *d.cover[i].source();
        for (std::size_t j = 0; j < n; ++j)
        {
            for (std::size_t k = 0; k < n; ++k)
            {
                for (MorId w = 0; w < u.morphismCount(); ++w)
                {
                    for (MorId a : lifts[i][w])
                    {
                        for (MorId b : lifts[j][w])
                        {
                            for (MorId c : lifts[k][w])
                            {
                                for (ObjId x : bi.fiber(vi.source(a)))
                                {
                                    for (ObjId y : bi.fiber(vi.target(a)))
                                    {
                                        Transport::Result ij = t.hom(i, j, a, b, x, y);
                                        Transport::Result jk = t.hom(j, k, b, c, ij.source, ij.target);
                                        Transport::Result ik = t.hom(i, k, a, c, x, y);
                                        if (jk.source != ik.source || jk.target != ik.target || jk.map * ij.map != ik.map)
                                        {
                                            return CocycleFailure{i, j, k, "over " + u.morphismName(w) + " at " +
                                                                  bi.objectName(x) + " -> " + bi.objectName(y)};
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    return std::nullopt;
}

GlueResult glueDescent(const DescentDatum& d, std::size_t coverDegree)
{
    const FinCat& u = *d.base;
    std::size_t n = d.cover.size();
    if (n == 0 || d.pieces.size() != n)
        throw Error("NotACover", "a descent datum needs one piece per cover member");
    GlueResult out;
    out.cover = isNCover(d.cover, coverDegree);
    if (!out.cover.isCover)
        throw Error("NotACover", "the base functors do not form a " + std::to_string(coverDegree) +
                                 "-cover; first unhit simplex " + simplexName(u, *out.cover.witness));
    if (auto bad = checkCocycle(d))
        throw Error("CocycleViolated", "CocycleViolated(" + std::to_string(bad->i) + ", " + std::to_string(bad->j) + ", " +
                                       std::to_string(bad->k) + ") " + bad->detail);
    Transport t(d);
    auto lifts = liftsOf(d);

    // Objects: classes of (i, B) under the overlap identifications.
    std::vector<std::size_t> offset(n + 1, 0);
    for (std::size_t i = 0; i < n; ++i)
        offset[i + 1] = offset[i] + d.pieces[i]->objectCount();
    std::vector<std::size_t> parent(offset[n]);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x)
        {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    };
    for (std::size_t i = 0; i < n; ++i)
    {
        const FinCat& vi = *d.cover[i].source();
        for (std::size_t j = 0; j < n; ++j)
        {
            const FinCat& vj = *d.cover[j].source();
            for (ObjId yi = 0; yi < vi.objectCount(); ++yi)
                for (ObjId yj = 0; yj < vj.objectCount(); ++yj)
                {
                    if (d.cover[i].onObject(yi) != d.cover[j].onObject(yj))
                        continue;
                    for (ObjId b : d.pieces[i]->fiber(yi))
                    {
                        std::size_t p = find(offset[i] + b);
                        std::size_t q = find(offset[j] + t.object(i, j, yi, yj, b));
                        if (p != q)
                            parent[std::max(p, q)] = std::min(p, q);
                    }
                }
        }
    }
    std::map<std::size_t, std::size_t> classOfRoot;
    std::vector<std::size_t> classRep;
    std::vector<ObjId> classOver;
    for (std::size_t i = 0; i < n; ++i)
    {
        for (ObjId b = 0; b < d.pieces[i]->objectCount(); ++b)
        {
            std::size_t r = find(offset[i] + b);
            if (classOfRoot.emplace(r, classRep.size()).second)
            {
                classRep.push_back(offset[i] + b);
                classOver.push_back(d.cover[i].onObject(d.pieces[i]->over(b)));
            }
        }
    }
    std::map<std::tuple<std::size_t, std::size_t, ObjId>, ObjId> member;   // (class, i, y) ↦ B
    std::vector<std::vector<std::size_t> > classOf(n);
    for (std::size_t i = 0; i < n; ++i)
    {
        for (ObjId b = 0; b < d.pieces[i]->objectCount(); ++b)
        {
            std::size_t c = classOfRoot.at(find(offset[i] + b));
            classOf[i].push_back(c);
            if (!member.emplace(std::make_tuple(c, i, d.pieces[i]->over(b)), b).second)
                throw Error("CocycleViolated", "two objects of one fiber are identified in piece " + std::to_string(i));
        }
    }
    auto pieceName = [&](std::size_t global) {
        std::size_t i = std::upper_bound(offset.begin(), offset.end(), global) - offset.begin() - 1;
        return d.pieces[i]->objectName(global - offset[i]);
    };

    GradedBuilder builder(d.base);
    std::set<std::string> usedObjects;
    std::vector<ObjId> objOfClass(classRep.size());
    for (ObjId x = 0; x < u.objectCount(); ++x)
        for (std::size_t c = 0; c < classRep.size(); ++c)
            if (classOver[c] == x)
                objOfClass[c] = builder.addObject(uniqueName(usedObjects, pieceName(classRep[c])), x);
    builder.freezeObjects();

    // Hom spaces: the first lift (i, v) carries the basis.
    struct GluedHom
    {
        MorId base;
        std::size_t source;   // classes
        std::size_t target;
        std::size_t piece = kNone;
        MorId lift = kNone;
        HomId pieceHom = kNone;
        std::size_t dim = 0;
    };
    std::vector<GluedHom> homs;
    std::set<std::string> usedBasis;
    for (MorId m = 0; m < u.morphismCount(); ++m)
    {
        for (std::size_t cs = 0; cs < classRep.size(); ++cs)
        {
            if (classOver[cs] != u.source(m))
                continue;
            for (std::size_t ct = 0; ct < classRep.size(); ++ct)
            {
                if (classOver[ct] != u.target(m))
                    continue;
                GluedHom g{m, cs, ct};
                for (std::size_t i = 0; i < n && g.piece == kNone; ++i)
                {
                    const FinCat& vi = *d.cover[i].source();
                    for (MorId v : lifts[i][m])
                    {
                        auto s = member.find({cs, i, vi.source(v)});
                        auto e = member.find({ct, i, vi.target(v)});
                        if (s == member.end() || e == member.end())
                            continue;
                        g.piece = i;
                        g.lift = v;
                        g.pieceHom = d.pieces[i]->homId(v, s->second, e->second);
                        g.dim = d.pieces[i]->dim(g.pieceHom);
                        break;
                    }
                }
                if (g.piece == kNone)
                    throw Error("NotACover", "no lift of " + u.morphismName(m));
                HomId h = builder.homId(m, objOfClass[cs], objOfClass[ct]);
                if (homs.size() <= h)
                    homs.resize(h + 1, GluedHom{kNone, 0, 0});
                homs[h] = g;
                std::vector<std::string> names;
                for (std::size_t k = 0; k < g.dim; ++k)
                    names.push_back(uniqueName(usedBasis, d.pieces[g.piece]->basisName(g.pieceHom, k)));
                builder.setBasis(h, names);
            }
        }
    }

    // ι: the identification of the hom space of a lift with the glued one.
    std::map<std::tuple<HomId, std::size_t, MorId>, QMatrix> iotaCache;
    auto iota = [&](HomId h, std::size_t i, MorId v) -> const QMatrix& {
        auto key = std::make_tuple(h, i, v);
        auto it = iotaCache.find(key);
        if (it != iotaCache.end())
            return it->second;
        const GluedHom& g = homs[h];
        const FinCat& vi = *d.cover[i].source();
        ObjId s = member.at({g.source, i, vi.source(v)});
        ObjId e = member.at({g.target, i, vi.target(v)});
        return iotaCache.emplace(key, t.hom(i, g.piece, v, g.lift, s, e).map).first->second;
    };
    std::map<std::tuple<HomId, std::size_t, MorId>, QMatrix> inverseCache;
    auto iotaInverse = [&](HomId h, std::size_t i, MorId v) -> const QMatrix& {
        auto key = std::make_tuple(h, i, v);
        auto it = inverseCache.find(key);
        if (it != inverseCache.end())
            return it->second;
        return inverseCache.emplace(key, inverse(iota(h, i, v))).first->second;
    };
    auto apply = [](const QMatrix& m, const SparseVector& v) { return toSparse(m.apply(toDense(v, m.cols()))); };

    // Composition through 2-simplex lifts.
    for (HomId f = 0; f < homs.size(); ++f)
    {
        const GluedHom& gf = homs[f];
        for (MorId m2 : u.outgoing(u.target(gf.base)))
        {
            for (std::size_t cc = 0; cc < classRep.size(); ++cc)
            {
                if (classOver[cc] != u.target(m2))
                    continue;
                HomId g = builder.homId(m2, objOfClass[gf.target], objOfClass[cc]);
                HomId comp = builder.homId(u.compose(m2, gf.base), objOfClass[gf.source], objOfClass[cc]);
                std::optional<std::vector<SparseVector> > first;
                std::string firstLift;
                for (std::size_t k = 0; k < n; ++k)
                {
                    const FinCat& vk = *d.cover[k].source();
                    const GradedCat& bk = *d.pieces[k];
                    for (MorId w : lifts[k][gf.base])
                    {
                        for (MorId w2 : lifts[k][m2])
                        {
                            if (vk.source(w2) != vk.target(w))
                                continue;
                            auto ma = member.find({gf.source, k, vk.source(w)});
                            auto mb = member.find({gf.target, k, vk.target(w)});
                            auto mc = member.find({cc, k, vk.target(w2)});
                            if (ma == member.end() || mb == member.end() || mc == member.end())
                                continue;
                            HomId hf = bk.homId(w, ma->second, mb->second);
                            HomId hg = bk.homId(w2, mb->second, mc->second);
                            MorId w21 = vk.compose(w2, w);
                            std::vector<SparseVector> table(homs[g].dim * gf.dim);
                            for (std::size_t i = 0; i < homs[g].dim; ++i)
                            {
                                SparseVector x = apply(iotaInverse(g, k, w2), {{i, Rational(1)}});
                                for (std::size_t j = 0; j < gf.dim; ++j)
                                {
                                    SparseVector y = apply(iotaInverse(f, k, w), {{j, Rational(1)}});
                                    table[i * gf.dim + j] = apply(iota(comp, k, w21), bk.compose(hg, hf, x, y));
                                }
                            }
                            std::string name = std::to_string(k) + ":(" + vk.morphismName(w) + "," + vk.morphismName(w2) + ")";
                            if (!first)
                            {
                                first = table;
                                firstLift = name;
                            }
                            else if (table != *first)
                            {
                                throw Error("CompositionIllDefined", "lifts " + firstLift + " and " + name + " compose " +
                                                                     u.morphismName(m2) + " ∘ " + u.morphismName(gf.base) +
                                                                     " differently");
                            }
                        }
                    }
                }
                if (!first)
                    throw Error("NotACover", "no lift of the composable pair (" + u.morphismName(gf.base) + ", " +
                                             u.morphismName(m2) + ")");
                for (std::size_t i = 0; i < homs[g].dim; ++i)
                    for (std::size_t j = 0; j < gf.dim; ++j)
                        builder.setProduct(g, i, f, j, (*first)[i * gf.dim + j]);
            }
        }
    }

    // Units from the first identity lift.
    for (std::size_t c = 0; c < classRep.size(); ++c)
    {
        ObjId x = classOver[c];
        HomId h = builder.homId(u.identity(x), objOfClass[c], objOfClass[c]);
        bool done = false;
        for (std::size_t i = 0; i < n && !done; ++i)
        {
            const FinCat& vi = *d.cover[i].source();
            for (ObjId y = 0; y < vi.objectCount() && !done; ++y)
            {
                auto b = member.find({c, i, y});
                if (b == member.end())
                    continue;
                builder.setUnit(objOfClass[c], apply(iota(h, i, vi.identity(y)), d.pieces[i]->unit(b->second)));
                done = true;
            }
        }
    }

    try
    {
        out.glued = builder.build();
    }
    catch (const Error& e)
    {
        if (e.code() == "NonAssociative")
            throw Error("AssociativityFailed", e.detail());
        throw;
    }

    // Canonical comparisons b_i -> glued^{φ_i}.
    for (std::size_t i = 0; i < n; ++i)
    {
        const GradedCat& b = *d.pieces[i];
        GradedMap r = restrictGraded(out.glued, d.cover[i]);
        std::map<std::pair<ObjId, ObjId>, ObjId> restrictedObject;   // (y, glued object) ↦ object of r
        for (ObjId o = 0; o < r.category->objectCount(); ++o)
            restrictedObject[{r.category->over(o), r.functor.onObject(o)}] = o;
        std::vector<ObjId> objMap;
        for (ObjId x = 0; x < b.objectCount(); ++x)
            objMap.push_back(restrictedObject.at({b.over(x), objOfClass[classOf[i][x]]}));
        std::vector<QMatrix> maps;
        for (HomId h = 0; h < b.homCount(); ++h)
        {
            MorId v = b.homMorphism(h);
            HomId gh = builder.homId(d.cover[i].onMorphism(v), objOfClass[classOf[i][b.homSource(h)]],
                                     objOfClass[classOf[i][b.homTarget(h)]]);
            maps.push_back(iota(gh, i, v));
        }
        out.comparisons.push_back(GradedFunctor::make(d.pieces[i], r.category, Functor::identity(d.cover[i].source()),
                                                      objMap, maps));
    }
    return out;
}

}   // namespace mgc
