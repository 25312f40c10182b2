// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace safepdf::js {

struct Span {
    uint32_t start = 0; // UTF-16 code unit offsets into the source
    uint32_t end = 0;
    uint32_t byte_start = 0; // offsets into the UTF-8 form of the source
    uint32_t byte_end = 0;
    uint32_t line = 1;
    uint32_t column = 1;

    bool operator==(const Span&) const = default;
};

enum class NodeKind : uint8_t {
    // statements
    VarDecl,      // items: Declarator; flag: written as `const`
    Declarator,   // text: name; a: initializer
    FunctionDecl, // see Function
    ExprStmt,     // a
    Block,        // items
    If,           // a: test, b: consequent, c: alternate
    While,        // a: test, b: body
    DoWhile,      // a: body, b: test
    For,          // a: init (VarDecl or expression), b: test, c: update, d: body
    ForIn,        // a: VarDecl (one declarator) or target, b: object, c: body
    Return,       // a
    Break,        // text: label
    Continue,     // text: label
    Throw,        // a
    Try,          // a: block, text: catch parameter, b: catch block, c: finally block
    Switch,       // a: discriminant, items: Case
    Case,         // a: test (null for default), items: statements
    Labeled,      // text: label, a: statement
    With,         // a: object, b: body
    Empty,
    Debugger,

    // expressions
    Identifier,  // text
    Number,      // number
    String,      // text
    Boolean,     // flag
    Null,
    Regex,       // text: pattern, extra: flags
    This,
    Array,       // items (null for holes)
    Object,      // items: Property
    Property,    // text: key, a: value (function for accessors), op: Init/Get/Set
    Function,    // text: name (may be empty), params, items: body
    Unary,       // op, a
    Update,      // op, flag: prefix, a
    Binary,      // op, a, b
    Logical,     // op, a, b
    Assign,      // op, a: target, b: value
    Conditional, // a, b, c
    Call,        // a: callee, items: arguments
    New,         // a: callee, items: arguments
    Member,      // a: object, text: property name
    Index,       // a: object, b: property expression
    Sequence,    // items
};

enum class Op : uint8_t {
    None,
    // unary
    Neg, Plus, Not, BitNot, Typeof, Void, Delete,
    // update
    Inc, Dec,
    // binary
    Add, Sub, Mul, Div, Mod, Shl, Shr, UShr, BitAnd, BitOr, BitXor,
    Lt, Gt, Le, Ge, Eq, Ne, StrictEq, StrictNe, In, Instanceof,
    // logical
    And, Or,
    // assignment (Assign plainly, otherwise compound with the binary op)
    Assign,
    // property kinds
    Init, Get, Set,
};

std::string_view op_text(Op op);

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
    NodeKind kind;
    Span span;
    std::u16string text;
    std::u16string extra;
    double number = 0;
    Op op = Op::None;
    // Compound assignment operator for Assign nodes (Add for +=, ...).
    Op assign_op = Op::None;
    bool flag = false;
    NodePtr a, b, c, d;
    std::vector<NodePtr> items;
    std::vector<std::u16string> params;
    // Allocation site for literals, functions and `new` (0 when none).
    uint32_t site = 0;
    // 1 + the largest child height.
    uint32_t height = 1;
};

bool structurally_equal(Node const* x, Node const* y);

enum class Severity { Recoverable, Fatal };

struct ParseDiagnostic {
    Span span;
    std::string message;
    Severity severity = Severity::Fatal;
};

struct Program {
    std::u16string source;
    std::vector<NodePtr> body;
    uint32_t first_site = 1;
    uint32_t next_site = 1; // one past the last site used
};

struct ParseResult {
    std::shared_ptr<const Program> program; // null iff a Fatal diagnostic was raised
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return program != nullptr; }
};

struct ParserOptions {
    uint32_t first_site = 1;
};

inline constexpr int max_nesting_depth = 512;

ParseResult parse_js(std::u16string_view source, ParserOptions const& options = {});
ParseResult parse_js_utf8(std::string_view source, ParserOptions const& options = {});

// Names of top-level function declarations.
std::set<std::u16string> list_entry_functions(Program const& program);

// Source text that parses back to a structurally identical tree (ignoring
// spans and sites). Hand-built trees with an else-less `if` as the unbraced
// consequent of an `if` with else have no such text; parsed trees never do.
std::u16string print_program(Program const& program);
std::u16string print_node(Node const& node);

std::u16string utf8_to_utf16(std::string_view utf8);
std::string utf16_to_utf8(std::u16string_view utf16);

}
