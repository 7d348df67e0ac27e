import pytest

from logicdec.rules import (AndAvgNode, AndLukNode, Atom, EmptyDomainError,
                            Not, OrNode, Quant, RuleLinkError, RuleRef,
                            RuleSyntaxError, SetElement, UnboundSetError, Var,
                            expand_quantifiers, parse_program, pretty,
                            rule_source, tokenize)

PROGRAM = """
R(x) :- exists c in C, ~Y(c) ^ Rel(x, c)
Rel(x, y) :- Edge(x, y) | Equal(x, y)
Y(x) :- exists y in Prev, Equal(x, y)
"""


def body(source, name="R"):
    return parse_program(source).rules[name].body


class TestLexer:
    def test_simple_rule_token_stream(self):
        toks = tokenize("R(x) :- A(x) | B(x)")
        assert [t.text for t in toks[:-1]] == [
            "R", "(", "x", ")", ":-", "A", "(", "x", ")", "|", "B", "(", "x", ")"]
        assert len(toks) - 1 == 14  # excluding the EOF marker
        assert [t.text for t in toks[-5:-1]] == ["B", "(", "x", ")"]

    def test_token_kinds(self):
        toks = tokenize("~Y(c) ^ Rel(x, c)")
        kinds = [t.kind.name for t in toks[:-1]]
        assert kinds == ["NOT", "IDENT", "LP", "VAR", "RP", "ANDAVG",
                         "IDENT", "LP", "VAR", "COMMA", "VAR", "RP"]

    def test_illegal_character_position(self):
        with pytest.raises(RuleSyntaxError) as err:
            tokenize("R(x) :- @")
        assert err.value.col == 9
        assert err.value.line == 1

    def test_keywords_and_literals(self):
        kinds = [t.kind.name for t in tokenize("exists forall in 0 1 & :-")[:-1]]
        assert kinds == ["EXISTS", "FORALL", "IN", "LIT", "LIT", "ANDLUK", "IMPLIES"]

    def test_comments_are_skipped(self):
        assert len(tokenize("A(x) # trailing words ~ | (")) == 5  # A ( x ) EOF


class TestParser:
    def test_disjunctive_relatedness_rule(self):
        rel = parse_program("Rel(x, c) :- Edge(x, c) | Equal(x, c)").rules["Rel"]
        assert rel.params == ("x", "c")
        assert rel.body == OrNode((Atom("Edge", (Var("x"), Var("c"))),
                                   Atom("Equal", (Var("x"), Var("c")))))

    def test_quantified_gate_rule(self):
        program = parse_program(PROGRAM)
        assert program.rules["R"].body == Quant(
            "exists", "c", "C",
            AndAvgNode((Not(RuleRef("Y", (Var("c"),))),
                        RuleRef("Rel", (Var("x"), Var("c"))))))

    def test_precedence_or_binds_loosest(self):
        src = "R(x) :- A(x) | B(x) & C(x)\nA(x) :- 1\nB(x) :- 1\nC(x) :- 1"
        assert parse_program(src).rules["R"].body == OrNode((
            RuleRef("A", (Var("x"),)),
            AndLukNode((RuleRef("B", (Var("x"),)), RuleRef("C", (Var("x"),)))),
        ))

    def test_all_two_operator_combinations(self):
        # hand-built reference for every (op1, op2) pair over A op1 B op2 C
        A, B, C = (RuleRef(n, (Var("x"),)) for n in "ABC")
        expected = {
            ("|", "|"): OrNode((A, B, C)),
            ("|", "^"): OrNode((A, AndAvgNode((B, C)))),
            ("|", "&"): OrNode((A, AndLukNode((B, C)))),
            ("^", "|"): OrNode((AndAvgNode((A, B)), C)),
            ("^", "^"): AndAvgNode((A, B, C)),
            ("^", "&"): AndLukNode((AndAvgNode((A, B)), C)),
            ("&", "|"): OrNode((AndLukNode((A, B)), C)),
            ("&", "^"): AndAvgNode((AndLukNode((A, B)), C)),
            ("&", "&"): AndLukNode((A, B, C)),
        }
        defs = "\nA(x) :- 1\nB(x) :- 1\nC(x) :- 1"
        for (op1, op2), tree in expected.items():
            src = f"R(x) :- A(x) {op1} B(x) {op2} C(x)" + defs
            assert parse_program(src).rules["R"].body == tree, (op1, op2)

    def test_parentheses_protect_grouping(self):
        src = "R(x) :- (A(x) ^ B(x)) ^ C(x)\nA(x) :- 1\nB(x) :- 1\nC(x) :- 1"
        A, B, C = (RuleRef(n, (Var("x"),)) for n in "ABC")
        assert parse_program(src).rules["R"].body == AndAvgNode((AndAvgNode((A, B)), C))

    def test_literals_parse_to_empty_connectives(self):
        prog = parse_program("R(x) :- Equal(x, x) ^ 0\nS(x) :- 1")
        gate = prog.rules["R"].body
        assert isinstance(gate, AndAvgNode)
        assert gate.children[1] == OrNode(())
        assert prog.rules["S"].body == AndLukNode(())

    @pytest.mark.parametrize("source, fragment", [
        ("A(x) :- B(x)", "undefined rule 'B'"),
        ("A(x) :- A2(x)\nA(x) :- 1\nA2(x) :- 1", "duplicate rule name"),
        ("A(x) :- Equal(x, x, x)", "takes 2 arguments"),
        ("A(x) :- Equal(x, z)", "neither a head parameter nor bound"),
        ("Equal(x) :- 1", "redefines a built-in"),
        ("A(x) :- B(x, x)\nB(y) :- 1", "takes 1 arguments"),
    ])
    def test_link_errors(self, source, fragment):
        with pytest.raises(RuleLinkError, match=fragment):
            parse_program(source)

    @pytest.mark.parametrize("source", [
        "A(x) :- B(x)\nB(x) :- A(x)",
        "A(x) :- A(x)",
        "A(x) :- B(x)\nB(x) :- C(x)\nC(x) :- A(x)",
        "A(x) :- exists c in S, B(c) ^ Equal(x, c)\nB(x) :- ~C(x)\nC(x) :- A(x)",
    ])
    def test_cycles_rejected(self, source):
        with pytest.raises(RuleLinkError, match="cyclic"):
            parse_program(source)

    def test_generated_cyclic_programs_rejected(self):
        import random
        rnd = random.Random(9)
        for _ in range(25):
            n = rnd.randint(2, 6)
            names = [f"G{i}" for i in range(n)]
            lines = [f"{names[i]}(x) :- {names[(i + 1) % n]}(x)" for i in range(n)]
            # pad with harmless acyclic rules and shuffle
            lines += [f"H{i}(x) :- Equal(x, x)" for i in range(rnd.randint(0, 3))]
            rnd.shuffle(lines)
            with pytest.raises(RuleLinkError, match="cyclic"):
                parse_program("\n".join(lines))

    def test_syntax_error_reports_position_and_expectation(self):
        with pytest.raises(RuleSyntaxError, match="expected"):
            parse_program("A(x) :- Equal(x x)")

    def test_dependency_order_is_topological(self):
        program = parse_program(PROGRAM)
        order = program.order
        assert order.index("Rel") < order.index("R")
        assert order.index("Y") < order.index("R")


class TestExpansion:
    def test_exists_becomes_disjunction(self):
        prog = parse_program("A(x) :- exists c in S, Equal(x, c)")
        expanded = expand_quantifiers(prog.rules["A"].body, {"S": ["u", "v"]})
        assert expanded == OrNode((
            Atom("Equal", (Var("x"), SetElement("S", 0))),
            Atom("Equal", (Var("x"), SetElement("S", 1)))))

    def test_forall_becomes_single_nary_average(self):
        prog = parse_program("A(x) :- forall c in S, Equal(x, c)")
        expanded = expand_quantifiers(prog.rules["A"].body, {"S": [1, 2, 3]})
        assert isinstance(expanded, AndAvgNode)
        assert len(expanded.children) == 3

    def test_singleton_collapses(self):
        prog = parse_program("A(x) :- forall c in S, Equal(x, c)")
        expanded = expand_quantifiers(prog.rules["A"].body, {"S": [7]})
        assert expanded == Atom("Equal", (Var("x"), SetElement("S", 0)))

    def test_empty_domain_is_an_error(self):
        prog = parse_program("A(x) :- exists p in P, Edge(x, p)")
        with pytest.raises(EmptyDomainError):
            expand_quantifiers(prog.rules["A"].body, {"P": []})

    def test_unbound_set_is_an_error(self):
        prog = parse_program("A(x) :- exists p in P, Edge(x, p)")
        with pytest.raises(UnboundSetError):
            expand_quantifiers(prog.rules["A"].body, {"Q": [1]})

    def test_no_quantifiers_survive(self):
        program = parse_program(PROGRAM)
        expanded = expand_quantifiers(program.rules["R"].body,
                                      {"C": [1, 2, 3], "Prev": [4, 5]})

        def walk(e):
            yield e
            for attr in ("child", "body"):
                if hasattr(e, attr):
                    yield from walk(getattr(e, attr))
            for c in getattr(e, "children", ()):
                yield from walk(c)

        assert not any(isinstance(node, Quant) for node in walk(expanded))

    def test_nested_quantifiers_expand(self):
        prog = parse_program("A(x) :- exists p in P, exists q in Q, Edge(p, q)")
        expanded = expand_quantifiers(prog.rules["A"].body, {"P": [1, 2], "Q": [3]})
        assert expanded == OrNode((
            Atom("Edge", (SetElement("P", 0), SetElement("Q", 0))),
            Atom("Edge", (SetElement("P", 1), SetElement("Q", 0)))))


class TestRoundTrip:
    @pytest.mark.parametrize("source", [
        "R(x) :- exists c in C, ~Y(c) ^ Rel(x, c)",
        "Rel(x, y) :- Edge(x, y) | Equal(x, y)",
        "Y(x) :- exists y in Prev, Equal(x, y)",
        "R(x) :- Persona(x) | Common(x)",
        "Common(x) :- (exists p in P, Edge(x, p)) ^ (exists u in U, Edge(x, u))",
        "A(x) :- ~(Equal(x, x) | Edge(x, x)) & W(x, x)",
        "A(x) :- Equal(x, x) ^ Equal(x, x) ^ Equal(x, x)",
        "A(x) :- (Equal(x, x) ^ Equal(x, x)) ^ Equal(x, x)",
        "A(x) :- forall c in C, Edge(x, c) | 0",
        "A(x) :- 1 & ~Edge(x, x)",
    ])
    def test_pretty_print_reparses_identically(self, source):
        name = source.split("(", 1)[0]
        stubs = "".join(f"\n{stub}" for stub in
                        ("Y(v) :- 1", "Rel(v, w) :- 1", "Persona(v) :- 1", "Common(v) :- 1")
                        if not stub.startswith(name + "("))
        program = parse_program(source + stubs)
        printed = rule_source(program.rules[name]) + stubs
        reparsed = parse_program(printed)
        assert reparsed.rules[name] == program.rules[name]

    def test_pretty_of_expanded_tree_mentions_elements(self):
        program = parse_program(PROGRAM)
        expanded = expand_quantifiers(program.rules["R"].body, {"C": [1, 2]})
        assert "C[0]" in pretty(expanded) and "C[1]" in pretty(expanded)
