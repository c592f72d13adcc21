#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "poselift/error.hpp"
#include "poselift/ingest.hpp"

namespace poselift {

namespace {

constexpr std::string_view kMagic = "DPTH";

std::uint32_t to_le(std::uint32_t v) {
    if constexpr (std::endian::native == std::endian::little) return v;
    return ((v & 0xffu) << 24) | ((v & 0xff00u) << 8) | ((v >> 8) & 0xff00u) | (v >> 24);
}

}  // namespace

DepthMap read_depth(std::istream& in, const std::string& source) {
    std::string header;
    if (!std::getline(in, header)) throw ParseError(source, 1, "missing DPTH header");
    std::istringstream hs(header);
    std::string magic;
    long long width = 0, height = 0;
    hs >> magic >> width >> height;
    if (!hs || magic != kMagic) throw ParseError(source, 1, "bad header, expected 'DPTH <w> <h>'");
    std::string trailing;
    if (hs >> trailing) throw ParseError(source, 1, "unexpected text after header");
    if (width <= 0 || height <= 0 || width > (1 << 16) || height > (1 << 16))
        throw ParseError(source, 1, "header dimensions out of range");

    DepthMap depth;
    depth.width = static_cast<int>(width);
    depth.height = static_cast<int>(height);
    const std::size_t count = static_cast<std::size_t>(width) * height;
    std::vector<std::uint32_t> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count * 4));
    if (static_cast<std::size_t>(in.gcount()) != count * 4)
        throw ParseError(source, 0,
                         "payload holds " + std::to_string(in.gcount() / 4) + " values, header declares " +
                             std::to_string(count));
    if (in.peek() != std::char_traits<char>::eof())
        throw ParseError(source, 0, "payload longer than header declares");
    depth.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) depth.values[i] = std::bit_cast<float>(to_le(raw[i]));
    try {
        validate(depth);
    } catch (const ValidationError& e) {
        throw ValidationError(source + ": " + e.what());
    }
    return depth;
}

DepthMap load_depth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(path.string() + ": cannot open depth file");
    return read_depth(in, path.string());
}

void write_depth(std::ostream& out, const DepthMap& depth) {
    validate(depth);
    out << kMagic << ' ' << depth.width << ' ' << depth.height << '\n';
    std::vector<std::uint32_t> raw(depth.values.size());
    for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = to_le(std::bit_cast<std::uint32_t>(depth.values[i]));
    out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size() * 4));
}

void save_depth(const std::filesystem::path& path, const DepthMap& depth) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(path.string() + ": cannot write depth file");
    write_depth(out, depth);
    if (!out) throw Error(path.string() + ": write failed");
}

}  // namespace poselift
