#pragma once

#include <cstdint>
#include <vector>

namespace arpu {

// Open-addressing map from uint64 key to int8 value, key 0 reserved empty.
// The oracle pair memo can reach ~10^7 entries per trial; node-based maps
// cost ~6x the memory.
class FlatU64Map {
public:
    FlatU64Map() { rehash(1024); }

    // Returns pointer to existing value or nullptr.
    const std::int8_t* find(std::uint64_t key) const {
        std::size_t i = probe_start(key);
        while (keys_[i] != 0) {
            if (keys_[i] == key) return &vals_[i];
            i = (i + 1) & mask_;
        }
        return nullptr;
    }

    // Pre-sizes the table for an expected entry count, avoiding rehash
    // spikes on runs whose query volume is known up front.
    void reserve(std::size_t expected_entries) {
        std::size_t cap = 1024;
        while (cap * 7 < expected_entries * 10) cap *= 2;
        if (cap > keys_.size()) rehash(cap);
    }

    void insert(std::uint64_t key, std::int8_t value) {
        if ((size_ + 1) * 10 >= keys_.size() * 7) rehash(keys_.size() * 2);
        std::size_t i = probe_start(key);
        while (keys_[i] != 0) {
            if (keys_[i] == key) {
                vals_[i] = value;
                return;
            }
            i = (i + 1) & mask_;
        }
        keys_[i] = key;
        vals_[i] = value;
        ++size_;
    }

    std::size_t size() const { return size_; }

private:
    std::size_t probe_start(std::uint64_t key) const {
        std::uint64_t h = key;
        h ^= h >> 33;
        h *= 0xff51afd7ed558ccdULL;
        h ^= h >> 33;
        return static_cast<std::size_t>(h) & mask_;
    }

    void rehash(std::size_t cap) {
        std::vector<std::uint64_t> old_keys = std::move(keys_);
        std::vector<std::int8_t> old_vals = std::move(vals_);
        keys_.assign(cap, 0);
        vals_.assign(cap, 0);
        mask_ = cap - 1;
        size_ = 0;
        for (std::size_t i = 0; i < old_keys.size(); ++i)
            if (old_keys[i] != 0) insert(old_keys[i], old_vals[i]);
    }

    std::vector<std::uint64_t> keys_;
    std::vector<std::int8_t> vals_;
    std::size_t mask_ = 0;
    std::size_t size_ = 0;
};

}  // namespace arpu
