#include "intspec/io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include <fmt/format.h>

#include "intspec/errors.hpp"

namespace intspec {

static_assert(std::endian::native == std::endian::little, "field files are written in host order");

namespace {

constexpr char kMagic[4] = {'S', 'P', 'F', '3'};

template <class T>
void put(std::string& out, const T& v) {
    out.append(reinterpret_cast<const char*>(&v), sizeof(T));
}

struct Reader {
    const std::string& buf;
    std::size_t pos = 0;
    const std::string& path;
    template <class T>
    T get(const char* what) {
        if (buf.size() - pos < sizeof(T)) throw FormatError(fmt::format("{}: truncated at {}", path, what));
        T v;
        std::memcpy(&v, buf.data() + pos, sizeof(T));
        pos += sizeof(T);
        return v;
    }
};

}  // namespace

void write_file_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    const fs::path tmp = target.string() + fmt::format(".tmp.{}", ::getpid());
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error(fmt::format("cannot open {} for writing", tmp.string()));
        f.write(content.data(), static_cast<std::streamsize>(content.size()));
        f.flush();
        if (!f) {
            f.close();
            fs::remove(tmp);
            throw std::runtime_error(fmt::format("write to {} failed", tmp.string()));
        }
    }
    fs::rename(tmp, target);
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error(fmt::format("cannot open {}", path));
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

void save_field(const std::string& path, const SpectralField3& v, const std::string& metadata_json) {
    std::string out;
    const std::size_t m = v.modes();
    out.reserve(64 + metadata_json.size() + 3 * m * sizeof(Complex));
    out.append(kMagic, 4);
    put(out, static_cast<std::uint32_t>(kFieldFormatVersion));
    put(out, static_cast<std::int32_t>(v.n()));
    put(out, static_cast<std::uint32_t>(v.divergence_free() ? 1u : 0u));
    put(out, v.discarded_norm());
    put(out, static_cast<std::uint64_t>(metadata_json.size()));
    out += metadata_json;
    put(out, static_cast<std::uint64_t>(3 * m));
    for (int a = 0; a < 3; ++a)
        out.append(reinterpret_cast<const char*>(v.component(a).data()), m * sizeof(Complex));
    write_file_atomic(path, out);
}

LoadedField load_field(const std::string& path, int expected_n) {
    std::string buf;
    try {
        buf = read_file(path);
    } catch (const std::runtime_error& e) {
        throw FormatError(e.what());
    }
    Reader r{buf, 0, path};
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0) throw FormatError(path + ": not an SPF3 field file");
    r.pos = 4;
    const auto version = r.get<std::uint32_t>("version");
    if (version != kFieldFormatVersion)
        throw FormatError(fmt::format("{}: unsupported version {} (expected {})", path, version, kFieldFormatVersion));
    const auto n = r.get<std::int32_t>("N");
    if (n < 2 || n > 1024 || n % 2 != 0) throw FormatError(fmt::format("{}: invalid N = {}", path, n));
    const auto flags = r.get<std::uint32_t>("flags");
    const auto discarded = r.get<double>("discarded norm");
    const auto meta_len = r.get<std::uint64_t>("metadata length");
    if (buf.size() - r.pos < meta_len) throw FormatError(path + ": truncated in metadata");
    std::string meta = buf.substr(r.pos, meta_len);
    r.pos += meta_len;
    const auto count = r.get<std::uint64_t>("coefficient count");
    const std::size_t m = static_cast<std::size_t>(n) * n * n;
    if (count != 3 * m) throw FormatError(fmt::format("{}: {} coefficients for N = {}", path, count, n));
    const std::size_t bytes = 3 * m * sizeof(Complex);
    if (buf.size() - r.pos != bytes)
        throw FormatError(fmt::format("{}: expected {} payload bytes, found {}", path, bytes, buf.size() - r.pos));
    if (expected_n > 0 && expected_n != n)
        throw ResampleRequiredError(
            fmt::format("{}: stored N = {} but N = {} was requested; resample explicitly", path, n, expected_n), n,
            expected_n);
    LoadedField out;
    out.field = SpectralField3(n);
    for (int a = 0; a < 3; ++a) {
        std::memcpy(out.field.component(a).data(), buf.data() + r.pos, m * sizeof(Complex));
        r.pos += m * sizeof(Complex);
    }
    out.field.set_divergence_free(flags & 1u);
    out.field.set_discarded_norm(discarded);
    out.metadata_json = std::move(meta);
    return out;
}

}  // namespace intspec
