#pragma once

#include <memory>
#include <string>
#include <vector>

#include "privlab/util.hpp"

namespace privlab {

struct SystemModel;

// Applicability predicate over a system model.
//
// Grammar (whitespace-insensitive, keywords lowercase):
//   expr     := or-expr
//   or-expr  := and-expr ("or" and-expr)*
//   and-expr := unary ("and" unary)*
//   unary    := "not" unary | primary
//   primary  := "(" expr ")"
//             | "flow-exists" "(" role-or-* "," role-or-* "," identifier-or-* ")"
//             | "flag" "(" flag-name ")"
//             | field ("=" | "!=") literal
//   field    := "architecture" | "retention_days"
//   literal  := "indefinite" | integer | architecture kind
//
// flow-exists matches a flow whose endpoints have the given roles and whose
// payload identifiers or exposed metadata include the named identifier; "*"
// wildcards any position. flag() reads one of the model's boolean policy
// flags. Evaluation is total on any valid model; unknown flag or field names
// are rejected at parse time.
class Predicate {
public:
    static Predicate parse(const std::string& text);  // throws ParseError

    bool evaluate(const SystemModel& model) const;

    // Model elements that support the evaluation outcome: ids of flows matched
    // by positively-contributing flow-exists atoms and names of policy fields
    // whose value decided flag/field atoms.
    std::vector<std::string> triggers(const SystemModel& model) const;

    const std::string& text() const { return text_; }

    struct Node;

private:
    std::shared_ptr<const Node> root_;
    std::string text_;
};

// Boolean model fields addressable via flag(...).
const std::vector<std::string>& known_flag_names();

}  // namespace privlab
