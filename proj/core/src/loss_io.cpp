#include "trajtree/loss_io.hpp"

#include <istream>

#include "trajtree/error.hpp"

namespace trajtree::loss {

namespace {

double number(const Json& record, const char* field) {
    auto it = record.find(field);
    if (it == record.end() || !it->is_number()) throw InputError(std::string("field '") + field + "' must be a number");
    return it->get<double>();
}

std::vector<double> numbers(const Json& record, const char* field) {
    auto it = record.find(field);
    if (it == record.end()) return {};
    if (!it->is_array()) throw InputError(std::string("field '") + field + "' must be an array of numbers");
    std::vector<double> out;
    for (const auto& v : *it) {
        if (!v.is_number()) throw InputError(std::string("field '") + field + "' must be an array of numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

}  // namespace

Json evaluate_record(const Json& record, Reduction default_reduction) {
    if (!record.is_object()) throw InputError("loss record is not an object");
    std::string kind;
    if (auto it = record.find("kind"); it != record.end()) {
        if (!it->is_string()) throw InputError("field 'kind' must be a string");
        kind = it->get<std::string>();
    } else {
        kind = record.contains("action_logps") ? "sft" : "dpo";
    }

    Json out = Json::object();
    out["kind"] = kind;
    if (kind == "sft") {
        TrajectoryLogProbs lp{numbers(record, "action_logps"), numbers(record, "observation_logps")};
        Reduction reduction = default_reduction;
        if (auto it = record.find("reduction"); it != record.end()) {
            if (!it->is_string()) throw InputError("field 'reduction' must be a string");
            try {
                reduction = parse_reduction(it->get<std::string>());
            } catch (const ConfigError& e) {
                throw InputError(e.what());
            }
        }
        out["reduction"] = to_string(reduction);
        out["loss"] = sft_loss(lp, reduction);
    } else if (kind == "dpo") {
        DpoInputs x{number(record, "policy_chosen"), number(record, "policy_rejected"), number(record, "ref_chosen"),
                    number(record, "ref_rejected"), number(record, "beta")};
        DpoGradient g = dpo_loss_grad(x);
        out["loss"] = dpo_loss(x);
        out["margin"] = dpo_margin(x);
        Json grad = Json::object();
        grad["policy_chosen"] = g.policy_chosen;
        grad["policy_rejected"] = g.policy_rejected;
        grad["ref_chosen"] = g.ref_chosen;
        grad["ref_rejected"] = g.ref_rejected;
        out["grad"] = std::move(grad);
    } else {
        throw InputError("unknown loss kind '" + kind + "' (expected sft or dpo)");
    }
    return out;
}

std::string evaluate_stream(std::istream& in, Reduction default_reduction) {
    std::string out;
    std::string text;
    std::size_t line = 0;
    while (std::getline(in, text)) {
        ++line;
        if (text.find_first_not_of(" \t\r\n") == std::string::npos) continue;
        try {
            out += evaluate_record(Json::parse(text), default_reduction).dump();
        } catch (const Json::parse_error& e) {
            throw InputError(line, std::string("malformed JSON: ") + e.what());
        } catch (const InputError& e) {
            throw InputError(line, e.what());
        }
        out += '\n';
    }
    return out;
}

}  // namespace trajtree::loss
