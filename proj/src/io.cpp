/**
 * JSON workspace loading and canonical saving.
 */

#include "mgc/io.hpp"

#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace mgc {

namespace {

struct Source
{
    std::string file;
    std::size_t line = 0;

    std::string label() const { return file + ":" + std::to_string(line); }
};

struct Declaration
{
    Json body;
    std::string name;
    Source where;
};

std::size_t lineAt(const std::string& text, std::size_t offset)
{
    std::size_t line = 1;
    for (std::size_t i = 0; i < offset && i < text.size(); ++i)
        if (text[i] == '\n')
            ++line;
    return line;
}

std::size_t lineOfName(const std::string& text, const std::string& name, std::size_t& from)
{
    std::string escaped = std::regex_replace(name, std::regex(R"([.^$|()\[\]{}*+?\\])"), R"(\$&)");
    std::regex pattern("\"name\"\\s*:\\s*\"" + escaped + "\"");
    std::smatch match;
    auto begin = text.begin() + static_cast<std::ptrdiff_t>(std::min(from, text.size()));
    if (!std::regex_search(begin, text.end(), match, pattern))
        return 0;
    std::size_t at = static_cast<std::size_t>(match.position(0)) + static_cast<std::size_t>(begin - text.begin());
    from = at + static_cast<std::size_t>(match.length(0));
    return lineAt(text, at);
}

std::string canonicalNumber(const Integer& n)
{
    return n.str();
}

class Loader
{
    public:
        Workspace load(const std::vector<std::pair<std::string, std::string> >& documents);

    private:
        Workspace w_;
        std::map<std::string, std::vector<Declaration> > byKind_;
        std::map<std::string, Source> declared_;
        std::map<std::string, std::pair<std::string, GradedFunctor> > restrictions_;   // graded ↦ (ambient, δ)
        const Declaration* current_ = nullptr;

        [[noreturn]] void fail(const std::string& code, const std::string& what) const;
        const Json& field(const Json& j, const std::string& key) const;
        std::string text(const Json& j, const std::string& key) const;
        std::vector<std::string> texts(const Json& j) const;
        Rational number(const Json& j) const;
        std::vector<RawTerm> terms(const Json& j) const;

        const CatPtr& category(const std::string& name) const;
        const GradedPtr& graded(const std::string& name) const;
        const GradedFunctor& gradedFunctor(const std::string& name) const;
        const Bimodule& bimodule(const std::string& name) const;
        const Functor& functor(const std::string& name) const;

        ObjId objectIn(const FinCat& c, const std::string& name) const;
        MorId morphismIn(const FinCat& c, const std::string& name) const;
        ObjId gradedObjectIn(const GradedCat& a, const std::string& name) const;
        std::string categoryName(const CatPtr& c) const;
        std::string gradedName(const GradedPtr& a) const;

        template <class F>
        auto validated(F&& build) const -> decltype(build());

        void loadCategory(const Declaration& d);
        void loadSubcategory(const Declaration& d);
        void loadDecomposition(const Declaration& d);
        void loadFunctor(const Declaration& d);
        void loadGraded(const Declaration& d);
        void loadGradedFunctor(const Declaration& d);
        void loadBimodule(const Declaration& d);
        void loadCover(const Declaration& d);
        void loadDiagram(const Declaration& d);

        Functor functorFrom(const Json& j, const CatPtr& source, const CatPtr& target) const;
        SetBifunctor carrierFrom(const Json& j, const CatPtr& left, const CatPtr& right) const;

        void emit(const std::string& kind, Json body);
};

void Loader::fail(const std::string& code, const std::string& what) const
{
    std::string prefix = current_ ? current_->where.label() + ": '" + current_->name + "': " : "";
    throw Error(code, prefix + what);
}

const Json& Loader::field(const Json& j, const std::string& key) const
{
    if (!j.is_object() || !j.contains(key))
        fail("ParseError", "missing field \"" + key + "\"");
    return j.at(key);
}

std::string Loader::text(const Json& j, const std::string& key) const
{
    const Json& v = field(j, key);
    if (!v.is_string())
        fail("ParseError", "field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::vector<std::string> Loader::texts(const Json& j) const
{
    if (!j.is_array())
        fail("ParseError", "expected an array of names");
    std::vector<std::string> out;
    for (const Json& v : j)
    {
        if (!v.is_string())
            fail("ParseError", "expected a name, got " + v.dump());
        out.push_back(v.get<std::string>());
    }
    return out;
}

Rational Loader::number(const Json& j) const
{
    if (j.is_number_integer())
        return Rational(j.get<long long>());
    if (!j.is_string())
        fail("ParseError", "expected an integer string, got " + j.dump());
    try
    {
        return parseRational(j.get<std::string>());
    }
    catch (const std::exception&)
    {
        fail("ParseError", "not a number: " + j.dump());
    }
}

std::vector<RawTerm> Loader::terms(const Json& j) const
{
    if (!j.is_array())
        fail("ParseError", "expected an array of [basis, num, den] terms");
    std::vector<RawTerm> out;
    for (const Json& t : j)
    {
        if (!t.is_array() || t.size() != 3 || !t[0].is_string())
            fail("ParseError", "a term must be [basis, num, den], got " + t.dump());
        Rational den = number(t[2]);
        if (den == 0)
            fail("ParseError", "zero denominator in " + t.dump());
        out.push_back({t[0].get<std::string>(), number(t[1]) / den});
    }
    return out;
}

const CatPtr& Loader::category(const std::string& name) const
{
    auto it = w_.categories.find(name);
    if (it == w_.categories.end())
        fail("UnknownReference", "no category named '" + name + "'");
    return it->second;
}

const GradedPtr& Loader::graded(const std::string& name) const
{
    auto it = w_.graded.find(name);
    if (it == w_.graded.end())
        fail("UnknownReference", "no graded category named '" + name + "'");
    return it->second;
}

const GradedFunctor& Loader::gradedFunctor(const std::string& name) const
{
    auto it = w_.gradedFunctors.find(name);
    if (it == w_.gradedFunctors.end())
        fail("UnknownReference", "no graded functor named '" + name + "'");
    return it->second;
}

const Bimodule& Loader::bimodule(const std::string& name) const
{
    auto it = w_.bimodules.find(name);
    if (it == w_.bimodules.end())
        fail("UnknownReference", "no bimodule named '" + name + "'");
    return it->second;
}

const Functor& Loader::functor(const std::string& name) const
{
    auto it = w_.functors.find(name);
    if (it == w_.functors.end())
        fail("UnknownReference", "no functor named '" + name + "'");
    return it->second;
}

ObjId Loader::objectIn(const FinCat& c, const std::string& name) const
{
    auto x = c.findObject(name);
    if (!x)
        fail("UnknownReference", "no object '" + name + "'");
    return *x;
}

MorId Loader::morphismIn(const FinCat& c, const std::string& name) const
{
    auto m = c.findMorphism(name);
    if (!m)
        fail("UnknownReference", "no morphism '" + name + "'");
    return *m;
}

ObjId Loader::gradedObjectIn(const GradedCat& a, const std::string& name) const
{
    for (ObjId x = 0; x < a.objectCount(); ++x)
        if (a.objectName(x) == name)
            return x;
    fail("UnknownReference", "no graded object '" + name + "'");
}

std::string Loader::categoryName(const CatPtr& c) const
{
    for (const auto& [name, d] : w_.categories)
        if (d == c)
            return name;
    for (const auto& [name, d] : w_.categories)
        if (d->sameAs(*c))
            return name;
    fail("UnknownReference", "the base category is not declared");
}

std::string Loader::gradedName(const GradedPtr& a) const
{
    for (const auto& [name, d] : w_.graded)
        if (d == a)
            return name;
    fail("UnknownReference", "a graded category is not declared");
}

template <class F>
auto Loader::validated(F&& build) const -> decltype(build())
{
    try
    {
        return build();
    }
    catch (const Error& e)
    {
        if (e.code() == "ParseError" || e.code() == "UnknownReference" || e.code() == "ValidationFailed")
            throw;
        fail("ValidationFailed", e.what());
    }
}

void Loader::emit(const std::string& kind, Json body)
{
    for (auto& [k, list] : w_.canonical)
    {
        if (k == kind)
        {
            list.push_back(std::move(body));
            return;
        }
    }
}

/* ------------------------------------------------------------------ */

Json categoryJson(const std::string& name, const FinCat& c)
{
    Json j;
    j["name"] = name;
    Json objects = Json::array();
    for (ObjId x = 0; x < c.objectCount(); ++x)
        objects.push_back({{"name", c.objectName(x)}, {"identity", c.morphismName(c.identity(x))}});
    j["objects"] = objects;
    Json morphisms = Json::array();
    for (MorId m = 0; m < c.morphismCount(); ++m)
        if (!c.isIdentity(m))
            morphisms.push_back(
                {{"name", c.morphismName(m)}, {"source", c.objectName(c.source(m))}, {"target", c.objectName(c.target(m))}});
    j["morphisms"] = morphisms;
    Json compositions = Json::array();
    for (MorId g = 0; g < c.morphismCount(); ++g)
        for (MorId f = 0; f < c.morphismCount(); ++f)
            if (!c.isIdentity(g) && !c.isIdentity(f) && c.target(f) == c.source(g))
                compositions.push_back({c.morphismName(g), c.morphismName(f), c.morphismName(c.compose(g, f))});
    j["compositions"] = compositions;
    return j;
}

void Loader::loadCategory(const Declaration& d)
{
    const Json& j = d.body;
    CatPtr c;
    if (j.contains("poset"))
    {
        const Json& p = j.at("poset");
        std::vector<std::pair<std::string, std::string> > relations;
        for (const Json& r : field(p, "relations"))
        {
            std::vector<std::string> pair = texts(r);
            if (pair.size() != 2)
                fail("ParseError", "a relation must be [lower, upper]");
            relations.emplace_back(pair[0], pair[1]);
        }
        c = validated([&] { return posetCategory(texts(field(p, "objects")), relations); });
    }
    else if (j.contains("chain"))
    {
        if (!j.at("chain").is_number_unsigned())
            fail("ParseError", "\"chain\" must be a length");
        c = chainCategory(j.at("chain").get<std::size_t>());
    }
    else if (j.contains("terminal"))
        c = terminalCategory();
    else
    {
        RawCategory raw;
        std::vector<RawCategory::Morphism> rest;
        for (const Json& o : field(j, "objects"))
        {
            std::string name = text(o, "name");
            std::string id = text(o, "identity");
            raw.objects.push_back(name);
            raw.identities[name] = id;
            raw.morphisms.push_back({id, name, name});
        }
        for (const Json& m : field(j, "morphisms"))
            raw.morphisms.push_back({text(m, "name"), text(m, "source"), text(m, "target")});
        std::set<std::pair<std::string, std::string> > given;
        for (const Json& t : j.value("compositions", Json::array()))
        {
            std::vector<std::string> triple = texts(t);
            if (triple.size() != 3)
                fail("ParseError", "a composition must be [g, f, g∘f]");
            raw.compositions.push_back({triple[0], triple[1], triple[2]});
            given.insert({triple[0], triple[1]});
        }
        for (const RawCategory::Morphism& m : raw.morphisms)
        {
            auto s = raw.identities.find(m.source);
            auto t = raw.identities.find(m.target);
            if (t != raw.identities.end() && !given.count({t->second, m.name}))
            {
                raw.compositions.push_back({t->second, m.name, m.name});
                given.insert({t->second, m.name});
            }
            if (s != raw.identities.end() && !given.count({m.name, s->second}))
            {
                raw.compositions.push_back({m.name, s->second, m.name});
                given.insert({m.name, s->second});
            }
        }
        c = validated([&] { return FinCat::fromRaw(raw); });
    }
    w_.categories[d.name] = c;
    emit("categories", categoryJson(d.name, *c));
}

void Loader::loadSubcategory(const Declaration& d)
{
    const Json& j = d.body;
    std::string catName = text(j, "category");
    const CatPtr& c = category(catName);
    std::vector<ObjId> objects;
    for (const std::string& x : texts(field(j, "objects")))
        objects.push_back(objectIn(*c, x));
    std::vector<MorId> morphisms;
    for (const std::string& m : texts(j.value("morphisms", Json::array())))
        morphisms.push_back(morphismIn(*c, m));
    Subcategory s = j.value("full", false) ? fullSubcategory(c, objects)
                                           : validated([&] { return generatedSubcategory(c, objects, morphisms); });
    w_.subcategories[d.name] = s;
    Json out;
    out["name"] = d.name;
    out["category"] = catName;
    Json os = Json::array();
    for (ObjId x = 0; x < c->objectCount(); ++x)
        if (s.objects[x])
            os.push_back(c->objectName(x));
    Json ms = Json::array();
    for (MorId m = 0; m < c->morphismCount(); ++m)
        if (s.morphisms[m] && !c->isIdentity(m))
            ms.push_back(c->morphismName(m));
    out["objects"] = os;
    out["morphisms"] = ms;
    emit("subcategories", out);
}

void Loader::loadDecomposition(const Declaration& d)
{
    const Json& j = d.body;
    std::string catName = text(j, "category");
    const CatPtr& c = category(catName);
    std::vector<char> ideal(c->morphismCount(), 0);
    for (const std::string& m : texts(field(j, "ideal")))
        ideal[morphismIn(*c, m)] = 1;
    Subcategory complement;
    complement.ambient = c;
    complement.objects.assign(c->objectCount(), 1);
    for (MorId m = 0; m < c->morphismCount(); ++m)
        complement.morphisms.push_back(!ideal[m]);
    if (!isIdeal(*c, ideal))
        fail("ValidationFailed", "the morphisms do not form an ideal");
    validated([&] {
        checkSubcategory(complement);
        return 0;
    });
    if (!decompositionCheck(*c, ideal, complement))
        fail("ValidationFailed", "not an ideal-subcategory decomposition");
    w_.decompositions[d.name] = {ideal, complement};
    Json out;
    out["name"] = d.name;
    out["category"] = catName;
    Json ms = Json::array();
    for (MorId m = 0; m < c->morphismCount(); ++m)
        if (ideal[m])
            ms.push_back(c->morphismName(m));
    out["ideal"] = ms;
    emit("decompositions", out);
}

Functor Loader::functorFrom(const Json& j, const CatPtr& source, const CatPtr& target) const
{
    const Json& objects = field(j, "objects");
    std::vector<ObjId> objectMap;
    for (ObjId x = 0; x < source->objectCount(); ++x)
    {
        const std::string& name = source->objectName(x);
        if (!objects.contains(name) || !objects.at(name).is_string())
            fail("ParseError", "no image for object '" + name + "'");
        objectMap.push_back(objectIn(*target, objects.at(name).get<std::string>()));
    }
    Json morphisms = j.value("morphisms", Json::object());
    std::vector<MorId> morphismMap;
    for (MorId m = 0; m < source->morphismCount(); ++m)
    {
        const std::string& name = source->morphismName(m);
        if (morphisms.contains(name) && morphisms.at(name).is_string())
            morphismMap.push_back(morphismIn(*target, morphisms.at(name).get<std::string>()));
        else if (source->isIdentity(m))
            morphismMap.push_back(target->identity(objectMap[source->source(m)]));
        else
            fail("ParseError", "no image for morphism '" + name + "'");
    }
    return validated([&] { return Functor::make(source, target, objectMap, morphismMap); });
}

Json functorBody(const Functor& f)
{
    const FinCat& s = *f.source();
    const FinCat& t = *f.target();
    Json objects = Json::object();
    for (ObjId x = 0; x < s.objectCount(); ++x)
        objects[s.objectName(x)] = t.objectName(f.onObject(x));
    Json morphisms = Json::object();
    for (MorId m = 0; m < s.morphismCount(); ++m)
        if (!s.isIdentity(m))
            morphisms[s.morphismName(m)] = t.morphismName(f.onMorphism(m));
    return {{"objects", objects}, {"morphisms", morphisms}};
}

void Loader::loadFunctor(const Declaration& d)
{
    const Json& j = d.body;
    std::string s = text(j, "source");
    std::string t = text(j, "target");
    Functor f = functorFrom(j, category(s), category(t));
    w_.functors[d.name] = f;
    Json out;
    out["name"] = d.name;
    out["source"] = s;
    out["target"] = t;
    Json body = functorBody(f);
    out["objects"] = body["objects"];
    out["morphisms"] = body["morphisms"];
    emit("functors", out);
}

/* ------------------------------------------------------------------ */

Json gradedJson(const std::string& name, const std::string& base, const GradedCat& a)
{
    RawGradedCategory raw = a.toRaw();
    Json j;
    j["name"] = name;
    j["base"] = base;
    Json fibers = Json::array();
    for (const auto& [over, objects] : raw.fibers)
        fibers.push_back({{"over", over}, {"objects", objects}});
    j["fibers"] = fibers;
    Json homs = Json::array();
    for (const RawGradedCategory::Hom& h : raw.homs)
        homs.push_back({{"morphism", h.morphism}, {"source", h.source}, {"target", h.target}, {"basis", h.basis}});
    j["homs"] = homs;
    Json products = Json::array();
    for (const RawGradedCategory::Product& p : raw.products)
        products.push_back({{"left", p.left}, {"right", p.right}, {"result", termsToJson(p.result)}});
    j["products"] = products;
    Json units = Json::array();
    for (const auto& [object, result] : raw.units)
        units.push_back({{"object", object}, {"result", termsToJson(result)}});
    j["units"] = units;
    return j;
}

void Loader::loadGraded(const Declaration& d)
{
    const Json& j = d.body;
    GradedPtr a;
    if (j.contains("free"))
        a = freeGraded(category(text(j, "free")));
    else if (j.contains("restrict"))
    {
        const Json& r = j.at("restrict");
        std::string ambient = text(r, "graded");
        GradedMap m = validated([&] { return restrictGraded(graded(ambient), functor(text(r, "functor"))); });
        a = m.category;
        restrictions_[d.name] = {ambient, m.functor};
    }
    else
    {
        RawGradedCategory raw;
        raw.base = category(text(j, "base"))->toRaw();
        for (const Json& f : field(j, "fibers"))
            raw.fibers.emplace_back(text(f, "over"), texts(field(f, "objects")));
        for (const Json& h : j.value("homs", Json::array()))
            raw.homs.push_back({text(h, "morphism"), text(h, "source"), text(h, "target"), texts(field(h, "basis"))});
        for (const Json& p : j.value("products", Json::array()))
            raw.products.push_back({text(p, "left"), text(p, "right"), terms(field(p, "result"))});
        for (const Json& u : field(j, "units"))
            raw.units.emplace_back(text(u, "object"), terms(field(u, "result")));
        a = validated([&] { return GradedCat::fromRaw(raw); });
    }
    w_.graded[d.name] = a;
    emit("graded", gradedJson(d.name, categoryName(a->base()), *a));
}

void Loader::loadGradedFunctor(const Declaration& d)
{
    const Json& j = d.body;
    GradedFunctor f;
    if (j.contains("identity"))
        f = GradedFunctor::identity(graded(text(j, "identity")));
    else if (j.contains("inclusion"))
    {
        std::string name = text(j, "inclusion");
        graded(name);
        auto it = restrictions_.find(name);
        if (it == restrictions_.end())
            fail("ValidationFailed", "'" + name + "' is not declared as a restriction");
        f = it->second.second;
    }
    else if (j.contains("compose"))
    {
        std::vector<std::string> parts = texts(j.at("compose"));
        if (parts.size() != 2)
            fail("ParseError", "\"compose\" takes [g, f]");
        const GradedFunctor& g = gradedFunctor(parts[0]);
        const GradedFunctor& h = gradedFunctor(parts[1]);
        if (g.source() != h.target())
            fail("ValidationFailed", "'" + parts[0] + "' does not start where '" + parts[1] + "' ends");
        f = GradedFunctor::compose(g, h);
    }
    else
    {
        const GradedPtr& source = graded(text(j, "source"));
        const GradedPtr& target = graded(text(j, "target"));
        const Json& b = field(j, "base");
        Functor base = b.is_string() ? functor(b.get<std::string>()) : functorFrom(b, source->base(), target->base());
        const Json& objects = field(j, "objects");
        std::vector<ObjId> objectMap;
        for (ObjId x = 0; x < source->objectCount(); ++x)
        {
            const std::string& name = source->objectName(x);
            if (!objects.contains(name) || !objects.at(name).is_string())
                fail("ParseError", "no image for graded object '" + name + "'");
            objectMap.push_back(gradedObjectIn(*target, objects.at(name).get<std::string>()));
        }
        std::map<std::string, std::pair<HomId, std::size_t> > sourceBasis;
        for (HomId h = 0; h < source->homCount(); ++h)
            for (std::size_t i = 0; i < source->dim(h); ++i)
                sourceBasis[source->basisName(h, i)] = {h, i};
        std::map<std::string, std::pair<HomId, std::size_t> > targetBasis;
        for (HomId h = 0; h < target->homCount(); ++h)
            for (std::size_t i = 0; i < target->dim(h); ++i)
                targetBasis[target->basisName(h, i)] = {h, i};
        std::vector<std::vector<RawTerm> > images(source->homCount());
        std::map<std::pair<HomId, std::size_t>, std::vector<RawTerm> > given;
        for (const Json& m : j.value("maps", Json::array()))
        {
            std::string basis = text(m, "basis");
            auto it = sourceBasis.find(basis);
            if (it == sourceBasis.end())
                fail("UnknownReference", "no basis element '" + basis + "'");
            given[it->second] = terms(field(m, "result"));
        }
        std::vector<QMatrix> maps;
        for (HomId h = 0; h < source->homCount(); ++h)
        {
            if (objectMap.size() != source->objectCount())
                break;
            MorId image = base.onMorphism(source->homMorphism(h));
            HomId t = validated([&] {
                return target->homId(image, objectMap[source->homSource(h)], objectMap[source->homTarget(h)]);
            });
            QMatrix m(target->dim(t), source->dim(h));
            for (std::size_t i = 0; i < source->dim(h); ++i)
            {
                auto g = given.find({h, i});
                if (g == given.end())
                    continue;
                for (const RawTerm& term : g->second)
                {
                    auto tb = targetBasis.find(term.basis);
                    if (tb == targetBasis.end() || tb->second.first != t)
                        fail("ValidationFailed", "'" + term.basis + "' is not in the image hom space of '" +
                                                     source->basisName(h, i) + "'");
                    m.add(tb->second.second, i, term.coeff);
                }
            }
            maps.push_back(m);
        }
        f = validated([&] { return GradedFunctor::make(source, target, base, objectMap, maps); });
    }
    w_.gradedFunctors[d.name] = f;

    const GradedCat& s = *f.source();
    const GradedCat& t = *f.target();
    Json out;
    out["name"] = d.name;
    out["source"] = gradedName(f.source());
    out["target"] = gradedName(f.target());
    out["base"] = functorBody(f.base());
    Json objects = Json::object();
    for (ObjId x = 0; x < s.objectCount(); ++x)
        objects[s.objectName(x)] = t.objectName(f.onObject(x));
    out["objects"] = objects;
    Json maps = Json::array();
    for (HomId h = 0; h < s.homCount(); ++h)
    {
        HomId image = f.onHom(h);
        for (std::size_t i = 0; i < s.dim(h); ++i)
        {
            std::vector<RawTerm> result;
            for (std::size_t k = 0; k < t.dim(image); ++k)
            {
                Rational x = f.homMap(h).get(k, i);
                if (x != 0)
                    result.push_back({t.basisName(image, k), x});
            }
            if (!result.empty())
                maps.push_back({{"basis", s.basisName(h, i)}, {"result", termsToJson(result)}});
        }
    }
    out["maps"] = maps;
    emit("graded_functors", out);
}

/* ------------------------------------------------------------------ */

SetBifunctor Loader::carrierFrom(const Json& j, const CatPtr& left, const CatPtr& right) const
{
    std::vector<SetBifunctor::Element> elements;
    std::map<std::string, std::size_t> index;
    for (const Json& e : field(j, "elements"))
    {
        std::string name = text(e, "name");
        if (!index.emplace(name, elements.size()).second)
            fail("ValidationFailed", "carrier element '" + name + "' appears twice");
        elements.push_back({name, objectIn(*right, text(e, "right")), objectIn(*left, text(e, "left"))});
    }
    auto element = [&](const std::string& name) {
        auto it = index.find(name);
        if (it == index.end())
            fail("UnknownReference", "no carrier element '" + name + "'");
        return it->second;
    };
    std::vector<std::vector<std::size_t> > leftAction(left->morphismCount(), std::vector<std::size_t>(elements.size(), kNone));
    std::vector<std::vector<std::size_t> > rightAction(elements.size(), std::vector<std::size_t>(right->morphismCount(), kNone));
    for (std::size_t s = 0; s < elements.size(); ++s)
    {
        leftAction[left->identity(elements[s].left)][s] = s;
        rightAction[s][right->identity(elements[s].right)] = s;
    }
    for (const Json& a : j.value("left_action", Json::array()))
    {
        std::vector<std::string> t = texts(a);
        if (t.size() != 3)
            fail("ParseError", "a left action entry is [u, s, u·s]");
        leftAction[morphismIn(*left, t[0])][element(t[1])] = element(t[2]);
    }
    for (const Json& a : j.value("right_action", Json::array()))
    {
        std::vector<std::string> t = texts(a);
        if (t.size() != 3)
            fail("ParseError", "a right action entry is [s, v, s·v]");
        rightAction[element(t[0])][morphismIn(*right, t[1])] = element(t[2]);
    }
    return validated([&] { return SetBifunctor::make(left, right, elements, leftAction, rightAction); });
}

Json bimoduleJson(const std::string& name, const std::string& left, const std::string& right, const Bimodule& m)
{
    const SetBifunctor& s = m.carrier();
    const FinCat& u = *s.left();
    const FinCat& v = *s.right();
    Json carrier;
    Json elements = Json::array();
    for (std::size_t e = 0; e < s.size(); ++e)
        elements.push_back({{"name", s.element(e).name}, {"right", v.objectName(s.element(e).right)},
                            {"left", u.objectName(s.element(e).left)}});
    carrier["elements"] = elements;
    Json leftAction = Json::array();
    for (MorId a = 0; a < u.morphismCount(); ++a)
        for (std::size_t e = 0; e < s.size(); ++e)
            if (!u.isIdentity(a) && u.source(a) == s.element(e).left)
                leftAction.push_back({u.morphismName(a), s.element(e).name, s.element(s.actLeft(a, e)).name});
    carrier["left_action"] = leftAction;
    Json rightAction = Json::array();
    for (std::size_t e = 0; e < s.size(); ++e)
        for (MorId b = 0; b < v.morphismCount(); ++b)
            if (!v.isIdentity(b) && v.target(b) == s.element(e).right)
                rightAction.push_back({s.element(e).name, v.morphismName(b), s.element(s.actRight(e, b)).name});
    carrier["right_action"] = rightAction;

    Json j;
    j["name"] = name;
    j["left"] = left;
    j["right"] = right;
    j["carrier"] = carrier;
    Json spaces = Json::array();
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        if (m.dim(p) == 0)
            continue;
        std::vector<std::string> basis;
        for (std::size_t i = 0; i < m.dim(p); ++i)
            basis.push_back(m.basisName(p, i));
        spaces.push_back({{"element", s.element(m.space(p).element).name},
                          {"right", m.right()->objectName(m.space(p).right)},
                          {"left", m.left()->objectName(m.space(p).left)},
                          {"basis", basis}});
    }
    j["spaces"] = spaces;
    const GradedCat& a = *m.left();
    const GradedCat& b = *m.right();
    Json leftConstants = Json::array();
    for (HomId h = 0; h < a.homCount(); ++h)
    {
        for (SpaceId p = 0; p < m.spaceCount(); ++p)
        {
            SpaceId t = m.leftTarget(h, p);
            if (t == kNone || a.dim(h) * m.dim(p) == 0)
                continue;
            const auto& c = m.leftConstants(h, p);
            for (std::size_t i = 0; i < a.dim(h); ++i)
                for (std::size_t k = 0; k < m.dim(p); ++k)
                {
                    std::vector<RawTerm> result;
                    for (const auto& [r, x] : c[i * m.dim(p) + k])
                        result.push_back({m.basisName(t, r), x});
                    if (!result.empty())
                        leftConstants.push_back({{"left", a.basisName(h, i)}, {"right", m.basisName(p, k)},
                                                 {"result", termsToJson(result)}});
                }
        }
    }
    j["left_action"] = leftConstants;
    Json rightConstants = Json::array();
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
    {
        for (HomId h = 0; h < b.homCount(); ++h)
        {
            SpaceId t = m.rightTarget(p, h);
            if (t == kNone || b.dim(h) * m.dim(p) == 0)
                continue;
            const auto& c = m.rightConstants(p, h);
            for (std::size_t k = 0; k < m.dim(p); ++k)
                for (std::size_t i = 0; i < b.dim(h); ++i)
                {
                    std::vector<RawTerm> result;
                    for (const auto& [r, x] : c[k * b.dim(h) + i])
                        result.push_back({m.basisName(t, r), x});
                    if (!result.empty())
                        rightConstants.push_back({{"left", m.basisName(p, k)}, {"right", b.basisName(h, i)},
                                                  {"result", termsToJson(result)}});
                }
        }
    }
    j["right_action"] = rightConstants;
    return j;
}

void Loader::loadBimodule(const Declaration& d)
{
    const Json& j = d.body;
    Bimodule m;
    if (j.contains("identity"))
        m = identityBimodule(graded(text(j, "identity")));
    else if (j.contains("lower"))
        m = validated([&] { return lowerBimodule(gradedFunctor(text(j, "lower"))); });
    else if (j.contains("upper"))
        m = validated([&] { return upperBimodule(gradedFunctor(text(j, "upper"))); });
    else
    {
        const GradedPtr& left = graded(text(j, "left"));
        const GradedPtr& right = graded(text(j, "right"));
        SetBifunctor carrier = carrierFrom(field(j, "carrier"), left->base(), right->base());
        BimoduleBuilder builder(left, right, carrier);
        std::map<std::string, std::size_t> elementIndex;
        for (std::size_t e = 0; e < carrier.size(); ++e)
            elementIndex[carrier.element(e).name] = e;
        std::map<std::string, std::pair<SpaceId, std::size_t> > basis;
        for (const Json& s : j.value("spaces", Json::array()))
        {
            std::string e = text(s, "element");
            if (!elementIndex.count(e))
                fail("UnknownReference", "no carrier element '" + e + "'");
            ObjId r = gradedObjectIn(*right, text(s, "right"));
            ObjId l = gradedObjectIn(*left, text(s, "left"));
            SpaceId p = validated([&] { return builder.spaceId(elementIndex.at(e), r, l); });
            std::vector<std::string> names = texts(field(s, "basis"));
            for (std::size_t i = 0; i < names.size(); ++i)
                if (!basis.emplace(names[i], std::make_pair(p, i)).second)
                    fail("ValidationFailed", "basis name '" + names[i] + "' appears twice");
            builder.setBasis(p, names);
        }
        auto lookup = [&](const std::string& name) {
            auto it = basis.find(name);
            if (it == basis.end())
                fail("UnknownReference", "no bimodule basis element '" + name + "'");
            return it->second;
        };
        auto homBasis = [&](const GradedCat& a, const std::string& name) -> std::pair<HomId, std::size_t> {
            for (HomId h = 0; h < a.homCount(); ++h)
                for (std::size_t i = 0; i < a.dim(h); ++i)
                    if (a.basisName(h, i) == name)
                        return {h, i};
            fail("UnknownReference", "no basis element '" + name + "'");
        };
        auto vectorIn = [&](SpaceId t, const std::vector<RawTerm>& result) {
            std::map<std::size_t, Rational> acc;
            for (const RawTerm& term : result)
            {
                auto [q, k] = lookup(term.basis);
                if (q != t)
                    fail("ValidationFailed", "'" + term.basis + "' is not in the space of the product");
                acc[k] += term.coeff;
            }
            SparseVector v;
            for (const auto& [k, x] : acc)
                if (x != 0)
                    v.emplace_back(k, x);
            return v;
        };
        for (const Json& a : j.value("left_action", Json::array()))
        {
            auto [h, i] = homBasis(*left, text(a, "left"));
            auto [p, k] = lookup(text(a, "right"));
            const Bimodule::Space sp = builder.space(p);
            if (left->homSource(h) != sp.left)
                fail("ValidationFailed", "'" + text(a, "left") + "' does not act on '" + text(a, "right") + "'");
            std::size_t e = carrier.actLeft(left->homMorphism(h), sp.element);
            SpaceId t = builder.spaceId(e, sp.right, left->homTarget(h));
            builder.setLeft(h, i, p, k, vectorIn(t, terms(field(a, "result"))));
        }
        for (const Json& a : j.value("right_action", Json::array()))
        {
            auto [p, k] = lookup(text(a, "left"));
            auto [h, i] = homBasis(*right, text(a, "right"));
            const Bimodule::Space sp = builder.space(p);
            if (right->homTarget(h) != sp.right)
                fail("ValidationFailed", "'" + text(a, "right") + "' does not act on '" + text(a, "left") + "'");
            std::size_t e = carrier.actRight(sp.element, right->homMorphism(h));
            SpaceId t = builder.spaceId(e, right->homSource(h), sp.left);
            builder.setRight(p, k, h, i, vectorIn(t, terms(field(a, "result"))));
        }
        m = validated([&] { return builder.build(); });
    }
    std::set<std::string> names;
    for (SpaceId p = 0; p < m.spaceCount(); ++p)
        for (std::size_t i = 0; i < m.dim(p); ++i)
            if (!names.insert(m.basisName(p, i)).second)
                fail("ValidationFailed", "basis name '" + m.basisName(p, i) + "' appears twice");
    w_.bimodules[d.name] = m;
    emit("bimodules", bimoduleJson(d.name, gradedName(m.left()), gradedName(m.right()), m));
}

void Loader::loadCover(const Declaration& d)
{
    std::vector<std::string> members = texts(field(d.body, "members"));
    if (members.empty())
        fail("ValidationFailed", "a cover needs at least one member");
    std::string kind = w_.kindOf(members[0]);
    for (const std::string& m : members)
    {
        std::string k = w_.kindOf(m);
        if (k != "functors" && k != "graded_functors")
            fail("UnknownReference", "no functor or graded functor named '" + m + "'");
        if (k != kind)
            fail("ValidationFailed", "cover members mix functors and graded functors");
    }
    for (const std::string& m : members)
    {
        const CatPtr& t = kind == "functors" ? w_.functors.at(m).target() : w_.gradedFunctors.at(m).target()->base();
        const CatPtr& t0 = kind == "functors" ? w_.functors.at(members[0]).target()
                                              : w_.gradedFunctors.at(members[0]).target()->base();
        if (!t->sameAs(*t0))
            fail("ValidationFailed", "cover members have different targets");
        if (kind == "graded_functors" && w_.gradedFunctors.at(m).target() != w_.gradedFunctors.at(members[0]).target())
            fail("ValidationFailed", "cover members have different targets");
    }
    w_.covers[d.name] = members;
    emit("covers", Json{{"name", d.name}, {"members", members}});
}

void Loader::loadDiagram(const Declaration& d)
{
    const Json& j = d.body;
    DiagramDecl out;
    out.kind = text(j, "kind");
    std::string baseName = text(j, "base");
    const CatPtr& base = category(baseName);
    Json canonical;
    canonical["name"] = d.name;
    canonical["kind"] = out.kind;
    canonical["base"] = baseName;
    if (out.kind == "constant")
    {
        std::string fiber = text(j, "fiber");
        out.pseudo = constantPseudofunctor(base, graded(fiber));
        canonical["fiber"] = fiber;
    }
    else if (out.kind == "functorial" || out.kind == "pseudo")
    {
        const Json& fibers = field(j, "fibers");
        std::vector<GradedPtr> fiberPtrs;
        Json fiberNames = Json::object();
        for (ObjId x = 0; x < base->objectCount(); ++x)
        {
            const std::string& name = base->objectName(x);
            if (!fibers.contains(name) || !fibers.at(name).is_string())
                fail("ParseError", "no fiber over '" + name + "'");
            fiberPtrs.push_back(graded(fibers.at(name).get<std::string>()));
            fiberNames[name] = fibers.at(name);
        }
        canonical["fibers"] = fiberNames;
        const char* edgeKey = out.kind == "functorial" ? "functors" : "edges";
        const Json& edges = j.value(edgeKey, Json::object());
        Json edgeNames = Json::object();
        for (MorId m = 0; m < base->morphismCount(); ++m)
        {
            const std::string& name = base->morphismName(m);
            if (base->isIdentity(m))
                continue;
            if (!edges.contains(name) || !edges.at(name).is_string())
                fail("ParseError", std::string("no entry in \"") + edgeKey + "\" for '" + name + "'");
            edgeNames[name] = edges.at(name);
        }
        canonical[edgeKey] = edgeNames;
        if (out.kind == "functorial")
        {
            FunctorialDiagram fd;
            fd.base = base;
            fd.fibers = fiberPtrs;
            for (MorId m = 0; m < base->morphismCount(); ++m)
                fd.functors.push_back(base->isIdentity(m)
                                          ? GradedFunctor::identity(fiberPtrs[base->source(m)])
                                          : gradedFunctor(edgeNames.at(base->morphismName(m)).get<std::string>()));
            out.pseudo = validated([&] { return toPseudofunctor(fd); });
            out.functorial = fd;
        }
        else
        {
            PseudoFunctor& p = out.pseudo;
            p.base = base;
            p.fibers = fiberPtrs;
            for (MorId m = 0; m < base->morphismCount(); ++m)
                p.edges.push_back(base->isIdentity(m)
                                      ? identityBimodule(fiberPtrs[base->source(m)])
                                      : bimodule(edgeNames.at(base->morphismName(m)).get<std::string>()));
            Json coherence = Json::array();
            for (const Json& c : j.value("coherence", Json::array()))
            {
                std::string outerName = text(c, "outer");
                std::string innerName = text(c, "inner");
                MorId outer = morphismIn(*base, outerName);
                MorId inner = morphismIn(*base, innerName);
                if (base->isIdentity(outer) || base->isIdentity(inner) || base->target(inner) != base->source(outer))
                    fail("ValidationFailed", "coherence for (" + outerName + ", " + innerName +
                                                 ") is not on a composable pair of non-identities");
                const Bimodule& m2 = p.edges[outer];
                const Bimodule& m1 = p.edges[inner];
                const Bimodule& m21 = p.edges[base->compose(outer, inner)];
                auto elementOf = [&](const SetBifunctor& s, const std::string& name) {
                    for (std::size_t e = 0; e < s.size(); ++e)
                        if (s.element(e).name == name)
                            return e;
                    fail("UnknownReference", "no carrier element '" + name + "'");
                };
                auto basisOf = [&](const Bimodule& m, const std::string& name) -> std::pair<SpaceId, std::size_t> {
                    for (SpaceId q = 0; q < m.spaceCount(); ++q)
                        for (std::size_t i = 0; i < m.dim(q); ++i)
                            if (m.basisName(q, i) == name)
                                return {q, i};
                    fail("UnknownReference", "no bimodule basis element '" + name + "'");
                };
                Coherence coh;
                for (const Json& e : field(c, "elements"))
                {
                    std::vector<std::string> t = texts(e);
                    if (t.size() != 3)
                        fail("ParseError", "a coherence element entry is [s′, s, s′s]");
                    coh.elements[{elementOf(m2.carrier(), t[0]), elementOf(m1.carrier(), t[1])}] =
                        elementOf(m21.carrier(), t[2]);
                }
                for (SpaceId q2 = 0; q2 < m2.spaceCount(); ++q2)
                    for (SpaceId q1 = 0; q1 < m1.spaceCount(); ++q1)
                        if (m2.space(q2).right == m1.space(q1).left && m2.dim(q2) * m1.dim(q1) > 0)
                            coh.products[{q2, q1}].assign(m2.dim(q2) * m1.dim(q1), SparseVector{});
                for (const Json& e : c.value("products", Json::array()))
                {
                    auto [q2, i] = basisOf(m2, text(e, "left"));
                    auto [q1, k] = basisOf(m1, text(e, "right"));
                    auto it = coh.products.find({q2, q1});
                    if (it == coh.products.end())
                        fail("ValidationFailed", "'" + text(e, "left") + "' and '" + text(e, "right") +
                                                     "' do not compose");
                    std::map<std::size_t, Rational> acc;
                    std::size_t target = kNone;
                    for (const RawTerm& term : terms(field(e, "result")))
                    {
                        auto [qt, r] = basisOf(m21, term.basis);
                        if (target != kNone && qt != target)
                            fail("ValidationFailed", "the product of '" + text(e, "left") + "' and '" +
                                                         text(e, "right") + "' spans several spaces");
                        target = qt;
                        acc[r] += term.coeff;
                    }
                    SparseVector v;
                    for (const auto& [r, x] : acc)
                        if (x != 0)
                            v.emplace_back(r, x);
                    it->second[i * m1.dim(q1) + k] = v;
                }
                p.coherence[{outer, inner}] = coh;
            }
            validated([&] {
                validatePseudofunctor(p);
                return 0;
            });
            for (const auto& [key, coh] : p.coherence)
            {
                auto [outer, inner] = key;
                const Bimodule& m2 = p.edges[outer];
                const Bimodule& m1 = p.edges[inner];
                const Bimodule& m21 = p.edges[base->compose(outer, inner)];
                Json entry;
                entry["outer"] = base->morphismName(outer);
                entry["inner"] = base->morphismName(inner);
                Json elements = Json::array();
                for (const auto& [ab, r] : coh.elements)
                    elements.push_back({m2.carrier().element(ab.first).name, m1.carrier().element(ab.second).name,
                                        m21.carrier().element(r).name});
                entry["elements"] = elements;
                Json products = Json::array();
                for (const auto& [qq, values] : coh.products)
                {
                    auto [q2, q1] = qq;
                    SpaceId t = composeSpaces(p, outer, q2, inner, q1).first;
                    for (std::size_t i = 0; i < m2.dim(q2); ++i)
                        for (std::size_t k = 0; k < m1.dim(q1); ++k)
                        {
                            std::vector<RawTerm> result;
                            for (const auto& [r, x] : values[i * m1.dim(q1) + k])
                                result.push_back({m21.basisName(t, r), x});
                            if (!result.empty())
                                products.push_back({{"left", m2.basisName(q2, i)}, {"right", m1.basisName(q1, k)},
                                                    {"result", termsToJson(result)}});
                        }
                }
                entry["products"] = products;
                coherence.push_back(entry);
            }
            canonical["coherence"] = coherence;
        }
    }
    else
        fail("ParseError", "unknown diagram kind '" + out.kind + "'");
    validated([&] {
        validatePseudofunctor(out.pseudo);
        return 0;
    });
    w_.diagrams[d.name] = out;
    emit("diagrams", canonical);
}

/* ------------------------------------------------------------------ */

Workspace Loader::load(const std::vector<std::pair<std::string, std::string> >& documents)
{
    for (const std::string& kind : workspaceKinds())
        w_.canonical.emplace_back(kind, std::vector<Json>{});
    for (const auto& [file, content] : documents)
    {
        Json root;
        try
        {
            root = Json::parse(content);
        }
        catch (const Json::parse_error& e)
        {
            throw Error("ParseError", file + ":" + std::to_string(lineAt(content, e.byte)) + ": " + e.what());
        }
        if (!root.is_object())
            throw Error("ParseError", file + ":1: the top level must be an object");
        std::size_t cursor = 0;
        for (const auto& [key, list] : root.items())
        {
            if (std::find(workspaceKinds().begin(), workspaceKinds().end(), key) == workspaceKinds().end())
            {
                if (key == "comment")
                    continue;
                throw Error("ParseError", file + ": unknown section \"" + key + "\"");
            }
            if (!list.is_array())
                throw Error("ParseError", file + ": section \"" + key + "\" must be an array");
            for (const Json& body : list)
            {
                if (!body.is_object() || !body.contains("name") || !body.at("name").is_string())
                    throw Error("ParseError", file + ": every declaration in \"" + key + "\" needs a name");
                Declaration d{body, body.at("name").get<std::string>(), {file, 0}};
                std::size_t line = lineOfName(content, d.name, cursor);
                d.where.line = line;
                auto previous = declared_.find(d.name);
                if (previous != declared_.end())
                    throw Error("DuplicateDeclaration", d.where.label() + ": '" + d.name +
                                                            "' is already declared at " + previous->second.label());
                declared_[d.name] = d.where;
                byKind_[key].push_back(d);
            }
        }
    }
    for (const std::string& kind : workspaceKinds())
    {
        for (const Declaration& d : byKind_[kind])
        {
            current_ = &d;
            if (kind == "categories")
                loadCategory(d);
            else if (kind == "subcategories")
                loadSubcategory(d);
            else if (kind == "decompositions")
                loadDecomposition(d);
            else if (kind == "functors")
                loadFunctor(d);
            else if (kind == "graded")
                loadGraded(d);
            else if (kind == "graded_functors")
                loadGradedFunctor(d);
            else if (kind == "bimodules")
                loadBimodule(d);
            else if (kind == "covers")
                loadCover(d);
            else
                loadDiagram(d);
        }
    }
    current_ = nullptr;
    return std::move(w_);
}

}   // namespace

/* ------------------------------------------------------------------ */

const std::vector<std::string>& workspaceKinds()
{
    static const std::vector<std::string> kinds = {"categories", "subcategories", "decompositions",
                                                   "functors",   "graded",        "graded_functors",
                                                   "bimodules",  "covers",        "diagrams"};
    return kinds;
}

std::string Workspace::kindOf(const std::string& name) const
{
    if (categories.count(name))
        return "categories";
    if (subcategories.count(name))
        return "subcategories";
    if (decompositions.count(name))
        return "decompositions";
    if (functors.count(name))
        return "functors";
    if (graded.count(name))
        return "graded";
    if (gradedFunctors.count(name))
        return "graded_functors";
    if (bimodules.count(name))
        return "bimodules";
    if (covers.count(name))
        return "covers";
    if (diagrams.count(name))
        return "diagrams";
    return "";
}

Json termsToJson(const std::vector<RawTerm>& terms)
{
    Json out = Json::array();
    for (const RawTerm& t : terms)
        out.push_back({t.basis, canonicalNumber(numerator(t.coeff)), canonicalNumber(denominator(t.coeff))});
    return out;
}

Workspace loadWorkspaceText(const std::vector<std::pair<std::string, std::string> >& documents)
{
    return Loader().load(documents);
}

Workspace loadWorkspace(const std::vector<std::string>& paths)
{
    std::vector<std::pair<std::string, std::string> > documents;
    for (const std::string& path : paths)
    {
        std::ifstream in(path);
        if (!in)
            throw Error("ParseError", path + ": cannot open file");
        std::ostringstream content;
        content << in.rdbuf();
        documents.emplace_back(path, content.str());
    }
    return loadWorkspaceText(documents);
}

std::string saveWorkspace(const Workspace& w)
{
    Json root = Json::object();
    for (const auto& [kind, list] : w.canonical)
        if (!list.empty())
            root[kind] = list;
    return root.dump(2) + "\n";
}

}   // namespace mgc
