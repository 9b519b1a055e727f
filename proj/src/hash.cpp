#include "plottwist/hash.hpp"

#include <array>
#include <memory>

#include <openssl/evp.h>

#include "plottwist/errors.hpp"
#include "plottwist/jsonl.hpp"

namespace plottwist {

namespace {

class Sha256 {
 public:
  Sha256() : ctx_(EVP_MD_CTX_new(), &EVP_MD_CTX_free) {
    if (!ctx_ || EVP_DigestInit_ex(ctx_.get(), EVP_sha256(), nullptr) != 1)
      throw Error("sha256 init failed");
  }

  void update(std::string_view data) {
    if (EVP_DigestUpdate(ctx_.get(), data.data(), data.size()) != 1)
      throw Error("sha256 update failed");
  }

  std::string hex() {
    std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
    unsigned int len = 0;
    if (EVP_DigestFinal_ex(ctx_.get(), digest.data(), &len) != 1)
      throw Error("sha256 final failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (unsigned int i = 0; i < len; ++i) {
      out += kHex[digest[i] >> 4];
      out += kHex[digest[i] & 0x0F];
    }
    return out;
  }

 private:
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx_;
};

}  // namespace

std::string sha256_hex(std::string_view data) {
  Sha256 h;
  h.update(data);
  return h.hex();
}

std::string sha256_fields(std::initializer_list<std::string_view> fields) {
  Sha256 h;
  for (std::string_view f : fields) {
    const std::string len = std::to_string(f.size()) + ":";
    h.update(len);
    h.update(f);
  }
  return h.hex();
}

std::string sha256_file(const std::filesystem::path& path) {
  return sha256_hex(jsonl::read_text(path));
}

}  // namespace plottwist
