#include "qcav/stream_io.hpp"

#include <array>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace qcav {

namespace {

constexpr std::array<char, 4> kMagic = {'Q', 'P', 'T', 'S'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& buf, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& buf, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) buf.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

std::uint32_t get_u32(const unsigned char* p) {
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t get_u64(const unsigned char* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

const char* channel_name(Channel c) {
    switch (c) {
        case Channel::zpl: return "zpl";
        case Channel::sideband: return "sideband";
        case Channel::background: return "background";
    }
    return "unknown";
}

}

void write_stream(const std::filesystem::path& path, const PhotonStream& s) {
    s.validate();
    std::string buf;
    buf.reserve(28 + s.size() * 9);
    buf.append(kMagic.data(), kMagic.size());
    put_u32(buf, kVersion);
    put_u64(buf, s.duration_ps);
    put_u64(buf, s.seed);
    put_u64(buf, static_cast<std::uint64_t>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i) {
        put_u64(buf, s.tags_ps[i]);
        buf.push_back(static_cast<char>(s.channels[i]));
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_stream: cannot open " + path.string());
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw std::runtime_error("write_stream: write failed for " + path.string());
}

PhotonStream read_stream(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_stream: cannot open " + path.string());
    std::string raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (raw.size() < 32) throw std::runtime_error("read_stream: truncated header in " + path.string());
    const auto* p = reinterpret_cast<const unsigned char*>(raw.data());
    if (!std::equal(kMagic.begin(), kMagic.end(), raw.begin()))
        throw std::runtime_error("read_stream: bad magic in " + path.string());
    const std::uint32_t version = get_u32(p + 4);
    if (version != kVersion)
        throw std::runtime_error("read_stream: unsupported version " + std::to_string(version));

    PhotonStream s;
    s.duration_ps = get_u64(p + 8);
    s.seed = get_u64(p + 16);
    const std::uint64_t count = get_u64(p + 24);
    if (raw.size() != 32 + count * 9)
        throw std::runtime_error("read_stream: record count does not match file size");
    s.tags_ps.reserve(count);
    s.channels.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const unsigned char* rec = p + 32 + i * 9;
        s.tags_ps.push_back(get_u64(rec));
        const unsigned char c = rec[8];
        if (c > 2) throw std::runtime_error("read_stream: invalid channel byte");
        s.channels.push_back(static_cast<Channel>(c));
    }
    s.validate();
    return s;
}

void write_stream_ndjson(const std::filesystem::path& path, const PhotonStream& s) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("write_stream_ndjson: cannot open " + path.string());
    for (std::size_t i = 0; i < s.size(); ++i) {
        out << "{\"t_ps\": " << s.tags_ps[i]
            << ", \"channel\": \"" << channel_name(s.channels[i]) << "\"}\n";
    }
}

}
