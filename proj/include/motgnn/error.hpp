#pragma once

#include <stdexcept>
#include <string>

namespace motgnn {

// Single exception type for everything the library rejects; the CLI turns
// it into one stderr line and a nonzero exit.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Re-throws the active exception with a stage prefix so failures deep in
// the pipeline name the phase that produced them.
[[noreturn]] inline void rethrow_with_stage(const std::string& stage) {
    try {
        throw;
    } catch (const std::exception& e) {
        throw Error(stage + ": " + e.what());
    }
}

} // namespace motgnn
