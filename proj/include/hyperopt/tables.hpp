#ifndef HYPEROPT_TABLES_HPP
#define HYPEROPT_TABLES_HPP

#include "hyperopt/hyperreal.hpp"

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace hyperopt {

enum class TableOp { Add, Mul, Div };

/// One cell of a 3x3 class-interaction table. Rows/columns range over
/// {Infinitesimal, Appreciable, Infinite}; a cell with no single class
/// (nullopt) is ambiguous and carries two witnesses of different
/// classes. Zero results count as Infinitesimal here.
struct TableCell {
    std::optional<MagnitudeClass> cls;
    std::vector<std::pair<Hyperreal, Hyperreal>> witnesses;
    std::vector<MagnitudeClass> witness_classes;
};

struct InteractionTable {
    TableOp op;
    TableCell cells[3][3];

    nlohmann::json to_json(const ContextPtr &ctx) const;
    std::string render(const ContextPtr &ctx) const;
};

/// Builds the table by instantiating each class with concrete witnesses
/// and classifying every pairwise result.
InteractionTable interaction_table(const ContextPtr &ctx, TableOp op);

} // namespace hyperopt

#endif
