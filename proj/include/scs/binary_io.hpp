#pragma once

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

namespace scs::io {

// Fixed little-endian encoding, independent of host byte order.

void write_u8(std::ostream& out, std::uint8_t v);
void write_u16(std::ostream& out, std::uint16_t v);
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
inline void write_f64(std::ostream& out, double v) { write_u64(out, std::bit_cast<std::uint64_t>(v)); }
void write_magic(std::ostream& out, std::string_view magic);

/// Readers throw TruncatedData naming `what` when the stream ends early.
std::uint8_t read_u8(std::istream& in, std::string_view what);
std::uint16_t read_u16(std::istream& in, std::string_view what);
std::uint32_t read_u32(std::istream& in, std::string_view what);
std::uint64_t read_u64(std::istream& in, std::string_view what);
inline double read_f64(std::istream& in, std::string_view what) {
    return std::bit_cast<double>(read_u64(in, what));
}
/// Throws ParseError if the next bytes are not `magic`.
void expect_magic(std::istream& in, std::string_view magic);

}  // namespace scs::io
