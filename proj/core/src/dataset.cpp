#include "isobn/dataset.hpp"

#include <algorithm>

#include <fmt/format.h>

#include "isobn/errors.hpp"

namespace isobn {

Dataset::Dataset(std::vector<std::string> columns, std::vector<std::uint8_t> cells, Provenance provenance)
    : columns_(std::move(columns)), cells_(std::move(cells)), provenance_(std::move(provenance)) {
    if (columns_.empty()) {
        if (!cells_.empty()) throw ValidationError("dataset has cells but no columns");
        return;
    }
    if (cells_.size() % columns_.size() != 0) {
        throw ValidationError(fmt::format("dataset with {} columns has {} cells; rows are not rectangular",
                                          columns_.size(), cells_.size()));
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) {
        if (cells_[i] > 1) {
            throw ValidationError(fmt::format("dataset row {}, column '{}' holds {}; cells must be 0 or 1",
                                              i / columns_.size() + 1, columns_[i % columns_.size()],
                                              static_cast<int>(cells_[i])));
        }
    }
}

std::optional<std::size_t> Dataset::column_index(const std::string& name) const {
    auto it = std::find(columns_.begin(), columns_.end(), name);
    if (it == columns_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - columns_.begin());
}

}  // namespace isobn
