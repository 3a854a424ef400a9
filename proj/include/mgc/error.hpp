/**
 * Error type shared by all modules.
 *
 * Every failure carries a short machine-readable code (for instance
 * "MissingComposite" or "CocycleViolated") and a human-readable detail
 * naming the offending data.
 */

#ifndef MGC_ERROR_HPP
#define MGC_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mgc {

class Error : public std::runtime_error
{
    public:
        Error(std::string code, const std::string& detail)
            : std::runtime_error(code + ": " + detail), code_(std::move(code)), detail_(detail)
        {
        }

        const std::string& code() const { return code_; }
        const std::string& detail() const { return detail_; }

    private:
        std::string code_;
        std::string detail_;
};

}   // namespace mgc

#endif
