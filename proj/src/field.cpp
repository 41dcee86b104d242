#include "sketchcbr/field.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>

namespace sketchcbr {

namespace {

constexpr char kMagic[4] = {'E', 'F', 'L', 'D'};
constexpr std::uint8_t kVersion = 1;

void write_u32(std::ostream& out, std::uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    out.write(reinterpret_cast<const char*>(b), 4);
}

std::uint32_t read_u32(std::istream& in) {
    unsigned char b[4];
    in.read(reinterpret_cast<char*>(b), 4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

bool operator==(const DisplacementField& a, const DisplacementField& b) {
    if (a.width != b.width || a.height != b.height) return false;
    return std::memcmp(a.vectors.data(), b.vectors.data(), a.vectors.size() * sizeof(Vec2f)) == 0;
}

Vec2f sample_field(const DisplacementField& field, double x, double y) {
    const double cx = std::clamp(x, 0.0, static_cast<double>(field.width - 1));
    const double cy = std::clamp(y, 0.0, static_cast<double>(field.height - 1));
    int x0 = std::min(static_cast<int>(cx), field.width - 2);
    int y0 = std::min(static_cast<int>(cy), field.height - 2);
    if (x0 < 0) x0 = 0;
    if (y0 < 0) y0 = 0;
    const double fx = cx - x0;
    const double fy = cy - y0;
    const Vec2f v00 = field.at(x0, y0);
    const Vec2f v10 = field.at(x0 + 1, y0);
    const Vec2f v01 = field.at(x0, y0 + 1);
    const Vec2f v11 = field.at(x0 + 1, y0 + 1);
    Vec2f out;
    out.dx = static_cast<float>((1.0 - fy) * ((1.0 - fx) * v00.dx + fx * v10.dx) +
                                fy * ((1.0 - fx) * v01.dx + fx * v11.dx));
    out.dy = static_cast<float>((1.0 - fy) * ((1.0 - fx) * v00.dy + fx * v10.dy) +
                                fy * ((1.0 - fx) * v01.dy + fx * v11.dy));
    return out;
}

DisplacementField load_field(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open field file: " + path.string());
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) {
        throw FormatError(path.string() + ": bad EFLD magic");
    }
    std::uint8_t version = 0;
    in.read(reinterpret_cast<char*>(&version), 1);
    if (version != kVersion) {
        throw VersionError(path.string() + ": unsupported EFLD version " +
                           std::to_string(version));
    }
    const std::uint32_t width = read_u32(in);
    const std::uint32_t height = read_u32(in);
    if (!in || width == 0 || height == 0) {
        throw FormatError(path.string() + ": invalid EFLD dimensions");
    }
    DisplacementField field(static_cast<int>(width), static_cast<int>(height));
    static_assert(sizeof(Vec2f) == 2 * sizeof(float));
    in.read(reinterpret_cast<char*>(field.vectors.data()),
            static_cast<std::streamsize>(field.vectors.size() * sizeof(Vec2f)));
    if (!in) throw FormatError(path.string() + ": truncated EFLD payload");
    return field;
}

void save_field(const DisplacementField& field, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open field file for writing: " + path.string());
    out.write(kMagic, 4);
    out.write(reinterpret_cast<const char*>(&kVersion), 1);
    write_u32(out, static_cast<std::uint32_t>(field.width));
    write_u32(out, static_cast<std::uint32_t>(field.height));
    out.write(reinterpret_cast<const char*>(field.vectors.data()),
              static_cast<std::streamsize>(field.vectors.size() * sizeof(Vec2f)));
    if (!out) throw IoError("failed writing field file: " + path.string());
}

}  // namespace sketchcbr
