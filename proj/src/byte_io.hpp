#pragma once

#include "skewpath/error.hpp"

#include <bit>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace skewpath::detail {

// Canonical little-endian encoding, independent of host byte order.
class ByteWriter {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) { put(v, 4); }
    void u64(std::uint64_t v) { put(v, 8); }
    void f64(double v) { put(std::bit_cast<std::uint64_t>(v), 8); }
    void bytes(std::span<const std::uint8_t> b) { out_.insert(out_.end(), b.begin(), b.end()); }

    std::vector<std::uint8_t> take() { return std::move(out_); }

private:
    void put(std::uint64_t v, int width) {
        for (int k = 0; k < width; ++k) out_.push_back(static_cast<std::uint8_t>(v >> (8 * k)));
    }

    std::vector<std::uint8_t> out_;
};

class ByteReader {
public:
    explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
    std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
    std::uint64_t u64() { return get(8); }
    double f64() { return std::bit_cast<double>(get(8)); }

    std::span<const std::uint8_t> bytes(std::size_t count) {
        require(count);
        auto s = in_.subspan(pos_, count);
        pos_ += count;
        return s;
    }

    std::size_t remaining() const noexcept { return in_.size() - pos_; }

    /// Guards count * width against what is left before a caller reserves memory for it.
    void require_items(std::uint64_t count, std::size_t width) const {
        if (count > remaining() / width) throw FormatError("index file truncated");
    }

private:
    void require(std::size_t count) const {
        if (count > remaining()) throw FormatError("index file truncated");
    }

    std::uint64_t get(int width) {
        require(static_cast<std::size_t>(width));
        std::uint64_t v = 0;
        for (int k = 0; k < width; ++k) v |= static_cast<std::uint64_t>(in_[pos_ + k]) << (8 * k);
        pos_ += static_cast<std::size_t>(width);
        return v;
    }

    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

}  // namespace skewpath::detail
