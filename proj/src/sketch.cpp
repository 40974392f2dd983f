#include "cmsn/sketch.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>
#include <fstream>
#include <limits>

#include "cmsn/errors.hpp"

namespace cmsn {

namespace {

constexpr char kMagic[4] = {'C', 'M', 'S', 'N'};
constexpr std::uint16_t kFormatVersion = 1;

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
    out.push_back(static_cast<unsigned char>(v & 0xFF));
    out.push_back(static_cast<unsigned char>((v >> 8) & 0xFF));
}

void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>((v >> (8 * i)) & 0xFF));
}

struct Reader {
    const std::vector<unsigned char>& buf;
    std::size_t pos = 0;

    std::uint16_t u16() {
        if (pos + 2 > buf.size()) throw FormatError("sketch file truncated");
        std::uint16_t v = static_cast<std::uint16_t>(buf[pos] | (buf[pos + 1] << 8));
        pos += 2;
        return v;
    }
    std::uint64_t u64() {
        if (pos + 8 > buf.size()) throw FormatError("sketch file truncated");
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf[pos + i]) << (8 * i);
        pos += 8;
        return v;
    }
};

}  // namespace

Sketch::Sketch(std::uint64_t seed, std::uint32_t depth, std::uint32_t width)
    : family_(seed, depth, width) {
    counts_.assign(static_cast<std::size_t>(depth) * width, 0);
}

void Sketch::update(TokenFingerprint fp) {
    if (total_ == std::numeric_limits<std::uint64_t>::max())
        throw NumericError("Sketch::update: counter overflow");
    for (std::uint32_t n = 0; n < depth(); ++n) {
        std::uint64_t& cell = counts_[static_cast<std::size_t>(n) * width() + family_.bucket(n, fp)];
        if (cell == std::numeric_limits<std::uint64_t>::max())
            throw NumericError("Sketch::update: counter overflow");
        ++cell;
    }
    ++total_;
}

BucketVector Sketch::bucket_vector(TokenFingerprint fp) const {
    BucketVector bv(depth());
    for (std::uint32_t n = 0; n < depth(); ++n)
        bv[n] = counts_[static_cast<std::size_t>(n) * width() + family_.bucket(n, fp)];
    return bv;
}

std::vector<std::uint64_t> Sketch::row(std::uint32_t n) const {
    if (n >= depth()) throw std::out_of_range("Sketch::row: row out of range");
    auto first = counts_.begin() + static_cast<std::size_t>(n) * width();
    return {first, first + width()};
}

void Sketch::merge(const Sketch& other) {
    if (!(family_ == other.family_))
        throw std::invalid_argument("Sketch::merge: mismatched (seed, depth, width)");
    for (std::size_t i = 0; i < counts_.size(); ++i) {
        if (counts_[i] > std::numeric_limits<std::uint64_t>::max() - other.counts_[i])
            throw NumericError("Sketch::merge: counter overflow");
        counts_[i] += other.counts_[i];
    }
    total_ += other.total_;
}

std::vector<unsigned char> Sketch::serialize() const {
    std::vector<unsigned char> out;
    out.reserve(4 + 2 + 8 * 4 + counts_.size() * 8);
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u16(out, kFormatVersion);
    put_u64(out, family_.seed());
    put_u64(out, depth());
    put_u64(out, width());
    put_u64(out, total_);
    for (std::uint64_t c : counts_) put_u64(out, c);
    return out;
}

Sketch Sketch::deserialize(const std::vector<unsigned char>& bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0)
        throw FormatError("sketch file: bad magic");
    Reader r{bytes, 4};
    std::uint16_t version = r.u16();
    if (version != kFormatVersion) throw FormatError("sketch file: unsupported format version");
    std::uint64_t seed = r.u64();
    std::uint64_t depth = r.u64();
    std::uint64_t width = r.u64();
    std::uint64_t total = r.u64();
    if (depth == 0 || width == 0 || depth > 1u << 20 || width > 1u << 30)
        throw FormatError("sketch file: implausible dimensions");
    Sketch s(seed, static_cast<std::uint32_t>(depth), static_cast<std::uint32_t>(width));
    for (auto& c : s.counts_) c = r.u64();
    if (r.pos != bytes.size()) throw FormatError("sketch file: trailing bytes");
    s.total_ = total;
    return s;
}

void Sketch::save(const std::string& path) const {
    auto bytes = serialize();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError("write failed: " + path);
}

Sketch Sketch::load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError("cannot open sketch file: " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

std::uint64_t estimate_cms(const BucketVector& bv) {
    if (bv.empty()) throw std::invalid_argument("estimate_cms: empty bucket vector");
    return *std::min_element(bv.begin(), bv.end());
}

double estimate_cmm(const BucketVector& bv, std::uint64_t total, std::uint32_t width) {
    const std::uint64_t cms = estimate_cms(bv);
    if (width < 2) return static_cast<double>(cms);
    std::vector<double> corrected;
    corrected.reserve(bv.size());
    for (std::uint64_t c : bv) {
        double noise = (static_cast<double>(total) - static_cast<double>(c)) / (width - 1.0);
        corrected.push_back(std::max(0.0, static_cast<double>(c) - noise));
    }
    std::sort(corrected.begin(), corrected.end());
    const std::size_t n = corrected.size();
    double median = (n % 2 == 1) ? corrected[n / 2]
                                 : 0.5 * (corrected[n / 2 - 1] + corrected[n / 2]);
    return std::min(median, static_cast<double>(cms));
}

}  // namespace cmsn
