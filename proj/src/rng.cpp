#include "dkvkoga/rng.hpp"

#include "dkvkoga/errors.hpp"

namespace dkv {

namespace {

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace

SeededRng::SeededRng(std::uint64_t seed) : seed_(seed) {
    std::uint64_t s = seed;
    for (auto& w : state_) w = splitmix64(s);
}

std::uint64_t SeededRng::next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double SeededRng::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double SeededRng::uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
}

std::uint64_t SeededRng::below(std::uint64_t n) {
    // Lemire's multiply-shift; bias is irrelevant here, determinism is not.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
}

void SeededRng::shuffle(std::vector<std::size_t>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(below(i));
        std::swap(items[i - 1], items[j]);
    }
}

std::vector<std::size_t> SeededRng::sample_without_replacement(std::size_t n, std::size_t k) {
    if (k > n) throw std::invalid_argument("sample_without_replacement: k > n");
    std::vector<std::size_t> pool(n);
    for (std::size_t i = 0; i < n; ++i) pool[i] = i;
    std::vector<std::size_t> out(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(below(n - i));
        std::swap(pool[i], pool[j]);
        out[i] = pool[i];
    }
    return out;
}

SeededRng SeededRng::derive(std::uint64_t stream) const {
    std::uint64_t s = seed_ ^ (0xA0761D6478BD642FULL + stream * 0xE7037ED1A0B428DBULL);
    return SeededRng(splitmix64(s));
}

Matrix sample_uniform(SeededRng& rng, std::span<const double> low, std::span<const double> high,
                      std::size_t n) {
    if (low.size() != high.size()) throw DimensionMismatch("sample_uniform: box dims differ");
    for (std::size_t j = 0; j < low.size(); ++j) {
        if (!(low[j] < high[j])) throw InvalidBox("sample_uniform: low must be < high");
    }
    Matrix out(n, low.size());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < low.size(); ++j) {
            out(i, j) = rng.uniform(low[j], high[j]);
        }
    }
    return out;
}

} // namespace dkv
