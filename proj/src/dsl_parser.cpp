#include <sstream>

#include "ephs/dsl.hpp"
#include "expr_parser.hpp"
#include "lexer.hpp"

namespace ephs {

namespace {

using detail::Token;
using detail::TokenKind;
using detail::TokenStream;

class Parser {
 public:
  explicit Parser(TokenStream& ts) : ts_(ts) {}

  ModelDoc document() {
    ModelDoc doc;
    doc.file = ts_.file();
    while (!ts_.at_end()) doc.decls.push_back(declaration());
    return doc;
  }

 private:
  Decl declaration() {
    if (ts_.is_keyword("use")) return use();
    if (ts_.is_keyword("porttype")) return port_type();
    if (ts_.is_keyword("interface")) return interface();
    if (ts_.is_keyword("diagram")) return diagram();
    if (ts_.is_keyword("component")) return component();
    if (ts_.is_keyword("system")) return system();
    ts_.fail("expected a declaration (use, porttype, interface, diagram, component, system), found " +
             detail::describe(ts_.peek()));
  }

  std::string name(std::string_view what) { return ts_.expect_identifier(what).text; }

  // IDENT ('.' IDENT)*
  std::string path(std::string_view what) {
    std::string out = name(what);
    while (ts_.accept_punct(".")) out += "." + name(what);
    return out;
  }

  Expr expr() { return detail::parse_expression(ts_); }

  UseDecl use() {
    UseDecl d;
    d.loc = ts_.loc_of(ts_.next());
    d.path = ts_.expect_string("a quoted path").text;
    return d;
  }

  PortTypeDecl port_type() {
    PortTypeDecl d;
    d.loc = ts_.loc_of(ts_.next());
    d.name = name("port type name");
    ts_.expect_punct("{");
    ts_.expect_keyword("flow");
    d.flow_unit = ts_.expect_string("a flow unit string").text;
    ts_.expect_keyword("effort");
    d.effort_unit = ts_.expect_string("an effort unit string").text;
    ts_.expect_punct("}");
    return d;
  }

  InterfaceDecl interface() {
    InterfaceDecl d;
    d.loc = ts_.loc_of(ts_.next());
    d.name = name("interface name");
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      PortDecl p;
      p.loc = ts_.loc_of(ts_.expect_keyword("port"));
      p.name = name("port name");
      ts_.expect_punct(":");
      p.type = name("port type name");
      d.ports.push_back(std::move(p));
    }
    return d;
  }

  DiagramDecl diagram() {
    DiagramDecl d;
    d.loc = ts_.loc_of(ts_.next());
    d.name = name("diagram name");
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      const Token& kw = ts_.peek();
      SourceLoc loc = ts_.loc_of(kw);
      if (ts_.is_keyword("box")) {
        ts_.next();
        BoxDecl b;
        b.loc = loc;
        b.label = name("box label");
        ts_.expect_punct(":");
        b.interface = name("interface name");
        d.boxes.push_back(std::move(b));
      } else if (ts_.is_keyword("junction")) {
        ts_.next();
        JunctionDecl j;
        j.loc = loc;
        j.name = name("junction name");
        ts_.expect_punct(":");
        j.type = name("port type name");
        d.junctions.push_back(std::move(j));
      } else if (ts_.is_keyword("bond")) {
        ts_.next();
        BondDecl b;
        b.loc = loc;
        b.box = name("box label");
        ts_.expect_punct(".");
        b.port = name("port name");
        ts_.expect_punct("--");
        b.junction = name("junction name");
        d.bonds.push_back(std::move(b));
      } else if (ts_.is_keyword("boundary")) {
        ts_.next();
        BoundaryDecl b;
        b.loc = loc;
        b.name = name("boundary port name");
        ts_.expect_punct(":");
        b.type = name("port type name");
        ts_.expect_punct("--");
        b.junction = name("junction name");
        d.boundary.push_back(std::move(b));
      } else {
        ts_.fail("expected box, junction, bond or boundary, found " + detail::describe(kw));
      }
    }
    return d;
  }

  std::vector<Expr> expr_list() {
    std::vector<Expr> out;
    ts_.expect_punct("[");
    if (ts_.accept_punct("]")) return out;
    do {
      out.push_back(expr());
    } while (ts_.accept_punct(","));
    ts_.expect_punct("]");
    return out;
  }

  Matrix matrix() {
    Matrix out;
    ts_.expect_punct("[");
    if (ts_.accept_punct("]")) return out;
    do {
      out.push_back(expr_list());
    } while (ts_.accept_punct(","));
    ts_.expect_punct("]");
    return out;
  }

  ComponentKind kind() {
    const Token& t = ts_.expect_identifier("component kind");
    if (t.text == "storage") return ComponentKind::storage;
    if (t.text == "dirac") return ComponentKind::dirac;
    if (t.text == "resistive") return ComponentKind::resistive;
    if (t.text == "environment") return ComponentKind::environment;
    ts_.fail_at(t, "unknown component kind '" + t.text + "' (expected storage, dirac, resistive or environment)");
  }

  ComponentDecl component() {
    ComponentDecl d;
    d.loc = ts_.loc_of(ts_.next());
    d.name = name("component name");
    ts_.expect_punct(":");
    d.kind = kind();
    ts_.expect_keyword("for");
    d.interface = name("interface name");
    if (ts_.is_keyword("unchecked")) {
      ts_.next();
      d.unchecked = true;
    }
    ts_.expect_punct("{");
    while (!ts_.accept_punct("}")) {
      const Token& kw = ts_.peek();
      SourceLoc loc = ts_.loc_of(kw);
      if (ts_.is_keyword("state")) {
        ts_.next();
        StateDecl s;
        s.loc = loc;
        s.name = name("state name");
        if (ts_.accept_punct(":")) s.port = name("port name");
        ts_.expect_punct("=");
        s.initial = expr();
        d.states.push_back(std::move(s));
      } else if (ts_.is_keyword("hamiltonian")) {
        if (d.hamiltonian) ts_.fail("duplicate hamiltonian");
        ts_.next();
        d.hamiltonian = expr();
      } else if (ts_.is_keyword("causality")) {
        ts_.next();
        CausalityDecl c;
        c.loc = loc;
        c.port = name("port name");
        const Token& t = ts_.expect_identifier("effort_in or flow_in");
        if (t.text == "effort_in") {
          c.causality = Causality::effort_in;
        } else if (t.text == "flow_in") {
          c.causality = Causality::flow_in;
        } else {
          ts_.fail_at(t, "expected effort_in or flow_in, found '" + t.text + "'");
        }
        d.causality.push_back(std::move(c));
      } else if (ts_.is_keyword("matrix")) {
        if (d.matrix) ts_.fail("duplicate matrix");
        ts_.next();
        d.matrix = matrix();
      } else if (ts_.is_keyword("kernel")) {
        if (d.kernel) ts_.fail("duplicate kernel");
        ts_.next();
        d.kernel = expr_list();
      } else if (ts_.is_keyword("param")) {
        ts_.next();
        AssignDecl a;
        a.loc = loc;
        a.name = name("parameter name");
        ts_.expect_punct("=");
        a.value = expr();
        d.params.push_back(std::move(a));
      } else {
        ts_.fail("expected state, hamiltonian, causality, matrix, kernel or param, found " + detail::describe(kw));
      }
    }
    return d;
  }

  SystemDecl system() {
    SystemDecl d;
    d.loc = ts_.loc_of(ts_.next());
    d.name = name("system name");
    ts_.expect_punct("{");
    bool have_diagram = false;
    while (!ts_.accept_punct("}")) {
      const Token& kw = ts_.peek();
      SourceLoc loc = ts_.loc_of(kw);
      if (ts_.is_keyword("diagram")) {
        if (have_diagram) ts_.fail("duplicate diagram");
        ts_.next();
        d.diagram = name("diagram name");
        have_diagram = true;
      } else if (ts_.is_keyword("fill")) {
        ts_.next();
        FillDecl f;
        f.loc = loc;
        f.label = name("box label");
        ts_.expect_punct("=");
        f.target = name("component or system name");
        d.fills.push_back(std::move(f));
      } else if (ts_.is_keyword("param") || ts_.is_keyword("init")) {
        bool is_param = ts_.next().text == "param";
        AssignDecl a;
        a.loc = loc;
        a.name = path(is_param ? "parameter path" : "state path");
        ts_.expect_punct("=");
        a.value = expr();
        (is_param ? d.params : d.inits).push_back(std::move(a));
      } else if (ts_.is_keyword("bind")) {
        ts_.next();
        BindDecl b;
        b.loc = loc;
        b.port = name("boundary port name");
        ts_.expect_punct("=");
        const Token& t = ts_.expect_identifier("effort or flow");
        if (t.text == "effort") {
          b.kind = BindingKind::effort_source;
        } else if (t.text == "flow") {
          b.kind = BindingKind::flow_source;
        } else {
          ts_.fail_at(t, "expected effort or flow, found '" + t.text + "'");
        }
        b.value = expr();
        d.binds.push_back(std::move(b));
      } else {
        ts_.fail("expected diagram, fill, param, init or bind, found " + detail::describe(kw));
      }
    }
    if (!have_diagram) throw Error(ErrorKind::syntax, "system '" + d.name + "' names no diagram", d.loc);
    return d;
  }

  TokenStream& ts_;
};

// ---------------------------------------------------------------------------
// Printing

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

std::string expr_list(const std::vector<Expr>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + to_string(v[i]);
  return out + "]";
}

void print_decl(std::ostream& os, const Decl& decl) {
  std::visit(
      [&](const auto& d) {
        using T = std::decay_t<decltype(d)>;
        if constexpr (std::is_same_v<T, UseDecl>) {
          os << "use " << quote(d.path) << "\n";
        } else if constexpr (std::is_same_v<T, PortTypeDecl>) {
          os << "porttype " << d.name << " { flow " << quote(d.flow_unit) << " effort " << quote(d.effort_unit)
             << " }\n";
        } else if constexpr (std::is_same_v<T, InterfaceDecl>) {
          os << "interface " << d.name << " {\n";
          for (const auto& p : d.ports) os << "  port " << p.name << " : " << p.type << "\n";
          os << "}\n";
        } else if constexpr (std::is_same_v<T, DiagramDecl>) {
          os << "diagram " << d.name << " {\n";
          for (const auto& b : d.boxes) os << "  box " << b.label << " : " << b.interface << "\n";
          for (const auto& j : d.junctions) os << "  junction " << j.name << " : " << j.type << "\n";
          for (const auto& b : d.bonds) os << "  bond " << b.box << "." << b.port << " -- " << b.junction << "\n";
          for (const auto& b : d.boundary) {
            os << "  boundary " << b.name << " : " << b.type << " -- " << b.junction << "\n";
          }
          os << "}\n";
        } else if constexpr (std::is_same_v<T, ComponentDecl>) {
          os << "component " << d.name << " : " << to_string(d.kind) << " for " << d.interface
             << (d.unchecked ? " unchecked" : "") << " {\n";
          for (const auto& s : d.states) {
            os << "  state " << s.name;
            if (s.port) os << " : " << *s.port;
            os << " = " << to_string(s.initial) << "\n";
          }
          if (d.hamiltonian) os << "  hamiltonian " << to_string(*d.hamiltonian) << "\n";
          for (const auto& c : d.causality) os << "  causality " << c.port << " " << to_string(c.causality) << "\n";
          if (d.matrix) {
            os << "  matrix [";
            for (std::size_t i = 0; i < d.matrix->size(); ++i) {
              os << (i ? ",\n          " : "") << expr_list((*d.matrix)[i]);
            }
            os << "]\n";
          }
          if (d.kernel) os << "  kernel " << expr_list(*d.kernel) << "\n";
          for (const auto& p : d.params) os << "  param " << p.name << " = " << to_string(p.value) << "\n";
          os << "}\n";
        } else if constexpr (std::is_same_v<T, SystemDecl>) {
          os << "system " << d.name << " {\n";
          os << "  diagram " << d.diagram << "\n";
          for (const auto& f : d.fills) os << "  fill " << f.label << " = " << f.target << "\n";
          for (const auto& p : d.params) os << "  param " << p.name << " = " << to_string(p.value) << "\n";
          for (const auto& p : d.inits) os << "  init " << p.name << " = " << to_string(p.value) << "\n";
          for (const auto& b : d.binds) {
            os << "  bind " << b.port << " = " << (b.kind == BindingKind::effort_source ? "effort " : "flow ")
               << to_string(b.value) << "\n";
          }
          os << "}\n";
        }
      },
      decl);
}

}  // namespace

ModelDoc parse_model(std::string_view text, const std::string& file) {
  TokenStream ts(detail::tokenize(text, file), file);
  return Parser(ts).document();
}

std::string print_model(const ModelDoc& doc) {
  std::ostringstream os;
  for (std::size_t i = 0; i < doc.decls.size(); ++i) {
    if (i) os << "\n";
    print_decl(os, doc.decls[i]);
  }
  return os.str();
}

}  // namespace ephs
