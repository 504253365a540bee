#pragma once

#include <stdexcept>
#include <string>

namespace sentinel {

// Every engine failure carries a stable machine-readable code and, when the
// failure comes from a document, the path of the offending field.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message, std::string path = {})
        : std::runtime_error(message), code_(std::move(code)), path_(std::move(path)) {}

    const std::string& code() const noexcept { return code_; }
    const std::string& path() const noexcept { return path_; }

    Error with_prefix(const std::string& prefix) const {
        std::string p = path_.empty() ? prefix : prefix.empty() ? path_ : prefix + "." + path_;
        if (!prefix.empty() && !path_.empty() && path_.front() == '[') p = prefix + path_;
        return Error(code_, what(), p);
    }

private:
    std::string code_;
    std::string path_;
};

}  // namespace sentinel
