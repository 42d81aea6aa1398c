#include "scs/binary_io.hpp"

#include <array>

#include "scs/errors.hpp"

namespace scs::io {

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
    std::array<char, sizeof(T)> bytes{};
    for (std::size_t i = 0; i < sizeof(T); ++i) {
        bytes[i] = static_cast<char>((static_cast<std::uint64_t>(v) >> (8 * i)) & 0xffu);
    }
    out.write(bytes.data(), bytes.size());
}

template <typename T>
T read_le(std::istream& in, std::string_view what) {
    std::array<unsigned char, sizeof(T)> bytes{};
    in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
        throw TruncatedData("truncated data while reading " + std::string(what));
    }
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<std::uint64_t>(bytes[i]) << (8 * i);
    return static_cast<T>(v);
}

}  // namespace

void write_u8(std::ostream& out, std::uint8_t v) { write_le(out, v); }
void write_u16(std::ostream& out, std::uint16_t v) { write_le(out, v); }
void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }

void write_magic(std::ostream& out, std::string_view magic) {
    out.write(magic.data(), static_cast<std::streamsize>(magic.size()));
}

std::uint8_t read_u8(std::istream& in, std::string_view what) { return read_le<std::uint8_t>(in, what); }
std::uint16_t read_u16(std::istream& in, std::string_view what) { return read_le<std::uint16_t>(in, what); }
std::uint32_t read_u32(std::istream& in, std::string_view what) { return read_le<std::uint32_t>(in, what); }
std::uint64_t read_u64(std::istream& in, std::string_view what) { return read_le<std::uint64_t>(in, what); }

void expect_magic(std::istream& in, std::string_view magic) {
    std::string got(magic.size(), '\0');
    in.read(got.data(), static_cast<std::streamsize>(got.size()));
    if (in.gcount() != static_cast<std::streamsize>(magic.size()) || got != magic) {
        throw ParseError("bad magic: expected '" + std::string(magic) + "'");
    }
}

}  // namespace scs::io
