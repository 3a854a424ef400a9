/**
 * JSON workspaces: named categories, graded categories, functors,
 * bimodules, subcategories, decompositions, covers and diagrams loaded
 * from one or more files and written back in canonical form.
 *
 * Declarations are processed kind by kind in a fixed order, so a
 * declaration may refer to any declaration of an earlier kind.  Names are
 * unique across all kinds.  Load errors carry the code ParseError,
 * UnknownReference, DuplicateDeclaration or ValidationFailed and name the
 * file and line of the offending declaration.
 */

#ifndef MGC_IO_HPP
#define MGC_IO_HPP

#include <map>
#include <string>
#include <vector>
#include <json.hpp>
#include "mgc/groth.hpp"

namespace mgc {

using Json = nlohmann::ordered_json;

struct DecompositionDecl
{
    std::vector<char> ideal;
    Subcategory complement;
};

struct DiagramDecl
{
    std::string kind;                          // "constant", "functorial" or "pseudo"
    PseudoFunctor pseudo;
    std::optional<FunctorialDiagram> functorial;
};

struct Workspace
{
    std::map<std::string, CatPtr> categories;
    std::map<std::string, Subcategory> subcategories;
    std::map<std::string, DecompositionDecl> decompositions;
    std::map<std::string, Functor> functors;
    std::map<std::string, GradedPtr> graded;
    std::map<std::string, GradedFunctor> gradedFunctors;
    std::map<std::string, Bimodule> bimodules;
    std::map<std::string, std::vector<std::string> > covers;   // member names
    std::map<std::string, DiagramDecl> diagrams;

    /**
     * Canonical declaration per kind, in load order.
     */
    std::vector<std::pair<std::string, std::vector<Json> > > canonical;

    /**
     * The kind of a declared name, or "".
     */
    std::string kindOf(const std::string& name) const;
};

/**
 * Kinds in processing order, as they appear as top-level keys.
 */
const std::vector<std::string>& workspaceKinds();

/**
 * Parses and validates the files.
 */
Workspace loadWorkspace(const std::vector<std::string>& paths);

/**
 * Same, from in-memory documents labelled for error messages.
 */
Workspace loadWorkspaceText(const std::vector<std::pair<std::string, std::string> >& documents);

/**
 * Canonical JSON of the whole workspace, two-space indented.
 */
std::string saveWorkspace(const Workspace& w);

/**
 * [basis, num, den] triples.
 */
Json termsToJson(const std::vector<RawTerm>& terms);

}   // namespace mgc

#endif
