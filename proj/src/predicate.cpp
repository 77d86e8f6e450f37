#include "privlab/predicate.hpp"

#include <algorithm>
#include <cctype>

#include "privlab/model.hpp"

namespace privlab {

namespace {

const std::vector<std::string> kFlagNames = {
    "consent_withdrawal_supported", "per_function_consent", "user_notice_provided",
    "data_minimization",            "processing_separated", "perturbation_applied",
    "telemetry_default_on",
};

bool is_word_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& known_flag_names() { return kFlagNames; }

// ---------------------------------------------------------------------------
// AST
// ---------------------------------------------------------------------------

struct Predicate::Node {
    enum class Kind { And, Or, Not, Flag, FlowExists, FieldCompare };

    Kind kind = Kind::Flag;
    std::vector<std::shared_ptr<const Node>> children;

    std::string flag_name;                       // Flag
    std::string from_role, to_role, identifier;  // FlowExists ("*" = any)
    std::string field, literal;                  // FieldCompare
    bool negate_compare = false;                 // FieldCompare: != instead of =
};

namespace {

using Node = Predicate::Node;
using NodePtr = std::shared_ptr<const Node>;

// -- parser -----------------------------------------------------------------

class Parser {
public:
    explicit Parser(const std::string& text) : text_(text) {}

    NodePtr parse() {
        NodePtr e = parse_or();
        skip_ws();
        if (pos_ != text_.size()) {
            fail("unexpected trailing input at offset " + std::to_string(pos_));
        }
        return e;
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError("", "predicate \"" + text_ + "\": " + msg);
    }

    void skip_ws() {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    }

    bool eat(char c) {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string peek_word() {
        skip_ws();
        std::size_t p = pos_;
        std::string w;
        while (p < text_.size() && is_word_char(text_[p])) w.push_back(text_[p++]);
        return w;
    }

    std::string take_word() {
        std::string w = peek_word();
        pos_ += w.size();
        return w;
    }

    bool eat_keyword(const std::string& kw) {
        skip_ws();
        if (peek_word() == kw) {
            pos_ += kw.size();
            return true;
        }
        return false;
    }

    // Raw argument up to ',' or ')': identifier names may contain spaces.
    std::string take_call_arg() {
        skip_ws();
        std::size_t start = pos_;
        while (pos_ < text_.size() && text_[pos_] != ',' && text_[pos_] != ')') ++pos_;
        if (pos_ >= text_.size()) fail("unterminated argument list");
        return trim(text_.substr(start, pos_ - start));
    }

    NodePtr parse_or() {
        NodePtr left = parse_and();
        std::vector<NodePtr> parts{left};
        while (eat_keyword("or")) parts.push_back(parse_and());
        if (parts.size() == 1) return left;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::Or;
        n->children = std::move(parts);
        return n;
    }

    NodePtr parse_and() {
        NodePtr left = parse_unary();
        std::vector<NodePtr> parts{left};
        while (eat_keyword("and")) parts.push_back(parse_unary());
        if (parts.size() == 1) return left;
        auto n = std::make_shared<Node>();
        n->kind = Node::Kind::And;
        n->children = std::move(parts);
        return n;
    }

    NodePtr parse_unary() {
        if (eat_keyword("not")) {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Not;
            n->children.push_back(parse_unary());
            return n;
        }
        return parse_primary();
    }

    NodePtr parse_primary() {
        skip_ws();
        if (eat('(')) {
            NodePtr inner = parse_or();
            if (!eat(')')) fail("expected ')'");
            return inner;
        }
        std::string word = take_word();
        if (word.empty()) fail("expected an atom");

        if (word == "flow-exists") {
            if (!eat('(')) fail("flow-exists: expected '('");
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::FlowExists;
            n->from_role = take_call_arg();
            if (!eat(',')) fail("flow-exists: expected ','");
            n->to_role = take_call_arg();
            if (!eat(',')) fail("flow-exists: expected ','");
            n->identifier = take_call_arg();
            if (!eat(')')) fail("flow-exists: expected ')'");
            for (const std::string* role : {&n->from_role, &n->to_role}) {
                if (*role != "*") {
                    node_role_from_string(*role);  // throws on unknown role
                }
            }
            if (n->identifier.empty()) fail("flow-exists: empty identifier argument");
            return n;
        }

        if (word == "flag") {
            if (!eat('(')) fail("flag: expected '('");
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::Flag;
            n->flag_name = take_call_arg();
            if (!eat(')')) fail("flag: expected ')'");
            if (std::find(kFlagNames.begin(), kFlagNames.end(), n->flag_name) == kFlagNames.end()) {
                fail("unknown flag \"" + n->flag_name + "\"");
            }
            return n;
        }

        if (word == "architecture" || word == "retention_days") {
            auto n = std::make_shared<Node>();
            n->kind = Node::Kind::FieldCompare;
            n->field = word;
            skip_ws();
            if (eat('=')) {
                n->negate_compare = false;
            } else if (pos_ + 1 < text_.size() && text_[pos_] == '!' && text_[pos_ + 1] == '=') {
                pos_ += 2;
                n->negate_compare = true;
            } else if (text_.compare(pos_, 3, "\xe2\x89\xa0") == 0) {  // UTF-8 "not equal" sign
                pos_ += 3;
                n->negate_compare = true;
            } else {
                fail("expected '=' or '!=' after field " + word);
            }
            skip_ws();
            std::string literal = take_word();
            if (literal.empty()) fail("expected a literal after comparison operator");
            if (n->field == "architecture") {
                architecture_from_string(literal);  // throws on unknown kind
            } else if (literal != "indefinite") {
                for (char ch : literal) {
                    if (!std::isdigit(static_cast<unsigned char>(ch))) {
                        fail("retention_days literal must be an integer or \"indefinite\"");
                    }
                }
            }
            n->literal = literal;
            return n;
        }

        fail("unknown field or function \"" + word + "\"");
    }
};

// -- evaluation ---------------------------------------------------------------

bool flow_exists_matches(const Node& n, const InformationFlow& flow, const SystemModel& model) {
    const ModelNode* from = model.find_node(flow.from);
    const ModelNode* to = model.find_node(flow.to);
    if (!from || !to) return false;
    if (n.from_role != "*" && to_string(from->role) != n.from_role) return false;
    if (n.to_role != "*" && to_string(to->role) != n.to_role) return false;
    if (n.identifier == "*") return true;
    return flow.carries(n.identifier);
}

bool eval_node(const Node& n, const SystemModel& model) {
    switch (n.kind) {
        case Node::Kind::And:
            return std::all_of(n.children.begin(), n.children.end(),
                               [&](const NodePtr& c) { return eval_node(*c, model); });
        case Node::Kind::Or:
            return std::any_of(n.children.begin(), n.children.end(),
                               [&](const NodePtr& c) { return eval_node(*c, model); });
        case Node::Kind::Not:
            return !eval_node(*n.children.front(), model);
        case Node::Kind::Flag:
            return model.flag(n.flag_name);
        case Node::Kind::FlowExists:
            return std::any_of(model.flows.begin(), model.flows.end(),
                               [&](const InformationFlow& f) {
                                   return flow_exists_matches(n, f, model);
                               });
        case Node::Kind::FieldCompare: {
            bool eq;
            if (n.field == "architecture") {
                eq = model.architecture == architecture_from_string(n.literal);
            } else {  // retention_days
                if (n.literal == "indefinite") {
                    eq = !model.retention_days.has_value();
                } else {
                    eq = model.retention_days.has_value() &&
                         *model.retention_days == std::stoi(n.literal);
                }
            }
            return n.negate_compare ? !eq : eq;
        }
    }
    return false;
}

// Collect elements supporting the outcome: descend only into subtrees whose
// value matches what the parent needs (`want`).
void collect_triggers(const Node& n, const SystemModel& model, bool want,
                      std::vector<std::string>& out) {
    const bool value = eval_node(n, model);
    if (value != want) return;
    switch (n.kind) {
        case Node::Kind::And:
        case Node::Kind::Or:
            for (const auto& c : n.children) {
                if (eval_node(*c, model) == want) collect_triggers(*c, model, want, out);
            }
            break;
        case Node::Kind::Not:
            collect_triggers(*n.children.front(), model, !want, out);
            break;
        case Node::Kind::Flag:
            out.push_back(n.flag_name);
            break;
        case Node::Kind::FieldCompare:
            out.push_back(n.field);
            break;
        case Node::Kind::FlowExists:
            // Only positive matches name concrete flows.
            if (want) {
                for (const auto& f : model.flows) {
                    if (flow_exists_matches(n, f, model)) out.push_back(f.id);
                }
            }
            break;
    }
}

}  // namespace

Predicate Predicate::parse(const std::string& text) {
    Parser parser(text);
    Predicate p;
    p.root_ = parser.parse();
    p.text_ = text;
    return p;
}

bool Predicate::evaluate(const SystemModel& model) const {
    return eval_node(*root_, model);
}

std::vector<std::string> Predicate::triggers(const SystemModel& model) const {
    std::vector<std::string> out;
    collect_triggers(*root_, model, eval_node(*root_, model), out);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

}  // namespace privlab
