#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace isobn {

/// Where a dataset came from, when it was generated rather than read.
struct Provenance {
    std::optional<std::uint64_t> seed;
    std::string source;
};

/// Rectangular table of binary observations, stored row-major.
class Dataset {
public:
    Dataset() = default;
    /// Throws ValidationError unless cells.size() is a multiple of the column count and all cells are 0/1.
    Dataset(std::vector<std::string> columns, std::vector<std::uint8_t> cells, Provenance provenance = {});

    const std::vector<std::string>& columns() const { return columns_; }
    std::size_t column_count() const { return columns_.size(); }
    std::size_t row_count() const { return columns_.empty() ? 0 : cells_.size() / columns_.size(); }
    std::span<const std::uint8_t> row(std::size_t r) const {
        return std::span<const std::uint8_t>(cells_).subspan(r * columns_.size(), columns_.size());
    }
    std::uint8_t at(std::size_t r, std::size_t c) const { return cells_[r * columns_.size() + c]; }
    std::optional<std::size_t> column_index(const std::string& name) const;
    const Provenance& provenance() const { return provenance_; }

    bool operator==(const Dataset& other) const { return columns_ == other.columns_ && cells_ == other.cells_; }

private:
    std::vector<std::string> columns_;
    std::vector<std::uint8_t> cells_;
    Provenance provenance_;
};

}  // namespace isobn
