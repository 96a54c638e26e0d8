#include "hyperopt/tables.hpp"

#include "hyperopt/errors.hpp"

namespace hyperopt {

namespace {

// Witnesses per magnitude class, chosen so that every determinate cell
// agrees across the whole set and every indeterminate cell is realized
// with at least two distinct classes.
std::vector<Hyperreal> class_witnesses(const ContextPtr &ctx,
                                       MagnitudeClass c) {
    auto eps = [&](const Rat &p) { return Hyperreal::generator(ctx, 0, p); };
    switch (c) {
    case MagnitudeClass::Infinitesimal:
        return {eps(1), -eps(1), eps(2), mul(eps(1), eps(1))};
    case MagnitudeClass::Appreciable:
        return {Hyperreal::from_rat(ctx, 2), Hyperreal::from_rat(ctx, -2),
                Hyperreal::from_rat(ctx, 3),
                add(Hyperreal::from_rat(ctx, Rat(1, 2)), eps(1))};
    case MagnitudeClass::Infinite:
        return {eps(-1), -eps(-1), eps(-2)};
    default:
        throw Error("no witnesses for the zero class");
    }
}

MagnitudeClass table_class(const Hyperreal &x) {
    MagnitudeClass c = x.magnitude_class();
    // The epsilon column/row covers zero as well.
    return c == MagnitudeClass::Zero ? MagnitudeClass::Infinitesimal : c;
}

const char *class_symbol(std::optional<MagnitudeClass> c) {
    if (!c)
        return "?";
    switch (*c) {
    case MagnitudeClass::Infinitesimal:
        return "eps";
    case MagnitudeClass::Appreciable:
        return "a";
    case MagnitudeClass::Infinite:
        return "inf";
    default:
        return "0";
    }
}

const char *op_symbol(TableOp op) {
    switch (op) {
    case TableOp::Add:
        return "+-";
    case TableOp::Mul:
        return "*";
    case TableOp::Div:
        return "/";
    }
    return "?";
}

} // namespace

InteractionTable interaction_table(const ContextPtr &ctx, TableOp op) {
    static const MagnitudeClass classes[3] = {MagnitudeClass::Infinitesimal,
                                              MagnitudeClass::Appreciable,
                                              MagnitudeClass::Infinite};
    InteractionTable table;
    table.op = op;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) {
            TableCell &cell = table.cells[r][c];
            for (const auto &x : class_witnesses(ctx, classes[r])) {
                for (const auto &y : class_witnesses(ctx, classes[c])) {
                    Hyperreal result = op == TableOp::Add ? add(x, y)
                                       : op == TableOp::Mul
                                           ? mul(x, y)
                                           : div(x, y);
                    cell.witnesses.emplace_back(x, y);
                    cell.witness_classes.push_back(table_class(result));
                }
            }
            cell.cls = cell.witness_classes.front();
            for (auto wc : cell.witness_classes)
                if (wc != *cell.cls) {
                    cell.cls = std::nullopt;
                    break;
                }
        }
    }
    return table;
}

nlohmann::json InteractionTable::to_json(const ContextPtr &) const {
    nlohmann::json rows = nlohmann::json::array();
    for (int r = 0; r < 3; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < 3; ++c) {
            const TableCell &cell = cells[r][c];
            nlohmann::json cj{{"class", class_symbol(cell.cls)}};
            if (!cell.cls) {
                nlohmann::json ws = nlohmann::json::array();
                for (std::size_t i = 0; i < cell.witnesses.size(); ++i)
                    ws.push_back(
                        {{"x", cell.witnesses[i].first.str()},
                         {"y", cell.witnesses[i].second.str()},
                         {"class",
                          magnitude_class_name(cell.witness_classes[i])}});
                cj["witnesses"] = ws;
            }
            row.push_back(cj);
        }
        rows.push_back(row);
    }
    return {{"op", op_symbol(op)}, {"cells", rows}};
}

std::string InteractionTable::render(const ContextPtr &) const {
    static const char *headers[3] = {"eps", "a", "inf"};
    std::string out = std::string(op_symbol(op));
    out += "\t| eps\t| a\t| inf\n";
    for (int r = 0; r < 3; ++r) {
        out += headers[r];
        for (int c = 0; c < 3; ++c) {
            out += "\t| ";
            out += class_symbol(cells[r][c].cls);
        }
        out += "\n";
    }
    return out;
}

} // namespace hyperopt
