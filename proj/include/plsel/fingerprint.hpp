#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

namespace plsel {

// Incremental SHA-256, used for content-addressed cache keys and report
// provenance.
class Fingerprinter {
public:
    Fingerprinter();
    ~Fingerprinter();
    Fingerprinter(const Fingerprinter&) = delete;
    Fingerprinter& operator=(const Fingerprinter&) = delete;

    // Length-prefixed, so ("ab","c") and ("a","bc") differ.
    Fingerprinter& add(std::string_view bytes);
    Fingerprinter& add(std::uint64_t value);
    Fingerprinter& add(double value);

    // Finalizes; further add() calls are invalid.
    std::string hex();

private:
    struct State;
    std::unique_ptr<State> state_;
};

std::string sha256_hex(std::string_view bytes);

}  // namespace plsel
