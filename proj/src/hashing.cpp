#include "qrag/hashing.hpp"

#include <fstream>

#include "qrag/error.hpp"

namespace qrag {

std::uint64_t hash_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("hash_file: cannot open " + path.string());
    std::uint64_t hash = kFnvOffset;
    char buffer[1 << 16];
    while (in.read(buffer, sizeof buffer) || in.gcount() > 0) {
        hash = fnv1a64(std::string_view(buffer, static_cast<std::size_t>(in.gcount())), hash);
    }
    return hash;
}

}  // namespace qrag
