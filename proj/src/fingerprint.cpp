#include "plsel/fingerprint.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>
#include <stdexcept>

namespace plsel {

struct Fingerprinter::State {
    EVP_MD_CTX* ctx = nullptr;
    bool finished = false;
};

Fingerprinter::Fingerprinter() : state_(std::make_unique<State>()) {
    state_->ctx = EVP_MD_CTX_new();
    if (state_->ctx == nullptr || EVP_DigestInit_ex(state_->ctx, EVP_sha256(), nullptr) != 1)
        throw std::runtime_error("sha256 init failed");
}

Fingerprinter::~Fingerprinter() {
    if (state_ && state_->ctx) EVP_MD_CTX_free(state_->ctx);
}

Fingerprinter& Fingerprinter::add(std::uint64_t value) {
    unsigned char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(value >> (8 * i));
    EVP_DigestUpdate(state_->ctx, buf, sizeof buf);
    return *this;
}

Fingerprinter& Fingerprinter::add(double value) {
    return add(std::bit_cast<std::uint64_t>(value));
}

Fingerprinter& Fingerprinter::add(std::string_view bytes) {
    add(static_cast<std::uint64_t>(bytes.size()));
    EVP_DigestUpdate(state_->ctx, bytes.data(), bytes.size());
    return *this;
}

std::string Fingerprinter::hex() {
    if (state_->finished) throw std::logic_error("Fingerprinter::hex called twice");
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(state_->ctx, digest, &len);
    state_->finished = true;
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 0xf]);
    }
    return out;
}

std::string sha256_hex(std::string_view bytes) {
    Fingerprinter fp;
    fp.add(bytes);
    return fp.hex();
}

}  // namespace plsel
