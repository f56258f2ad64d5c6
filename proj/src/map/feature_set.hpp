#pragma once

#include <cstdint>
#include <vector>

namespace graft {

// Fixed-width bitfield over the global feature universe of one graph.
// Union and equality are the only mutating/comparing operations the
// propagation pass needs; element order is the global feature numbering.
class FeatureSet {
public:
    FeatureSet() = default;
    explicit FeatureSet(uint32_t width)
        : width_(width), words_((width + 63) / 64, 0) {}

    uint32_t width() const { return width_; }

    void set(uint32_t i) { words_[i >> 6] |= uint64_t{1} << (i & 63); }
    bool test(uint32_t i) const { return (words_[i >> 6] >> (i & 63)) & 1; }

    FeatureSet& operator|=(const FeatureSet& o) {
        for (size_t w = 0; w < words_.size(); ++w) words_[w] |= o.words_[w];
        return *this;
    }

    bool operator==(const FeatureSet&) const = default;
    // lexicographic on words; gives a stable ordering for table keys
    bool operator<(const FeatureSet& o) const { return words_ < o.words_; }

    bool any() const {
        for (uint64_t w : words_)
            if (w) return true;
        return false;
    }

    uint32_t count() const {
        uint32_t c = 0;
        for (uint64_t w : words_) c += static_cast<uint32_t>(__builtin_popcountll(w));
        return c;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {  // ascending bit index
        for (size_t wi = 0; wi < words_.size(); ++wi) {
            uint64_t w = words_[wi];
            while (w) {
                uint32_t bit = static_cast<uint32_t>(__builtin_ctzll(w));
                fn(static_cast<uint32_t>(wi * 64) + bit);
                w &= w - 1;
            }
        }
    }

private:
    uint32_t width_ = 0;
    std::vector<uint64_t> words_;
};

} // namespace graft
