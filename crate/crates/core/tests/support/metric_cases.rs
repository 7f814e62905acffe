//! Hand-derived metric values for small C/C++ functions.
//!
//! Every metric not listed for a case is expected to be 0. Node counts
//! use named nodes only. A function `R f(P) { B }` with k plain
//! parameters `int a` always contributes the header nodes
//! function_definition, primitive_type, function_declarator, identifier,
//! parameter_list (5) plus 3 per parameter (parameter_declaration,
//! primitive_type, identifier). Header height is 3 without parameters and
//! 5 with (definition, declarator, list, parameter, identifier). Inner
//! header nodes: definition (3 children), function_declarator (2),
//! parameter_list (k, when k > 0), each parameter_declaration (2).

use metriscope_core::metrics::{extract_features, MetricCatalog, METRIC_IDS};
use metriscope_core::syntax::{parse_function, NodeCategoryTable, SourceFunction};

pub struct Case {
    pub code: &'static str,
    /// Metrics other than T1..T3 with non-zero values.
    pub nonzero: &'static [(&'static str, f64)],
    pub t1: f64,
    pub t2: f64,
    /// T3 as children over inner nodes.
    pub t3: (f64, f64),
}

pub const CASES: &[Case] = &[
    // Nodes: header 5, compound. Height: definition > declarator > identifier.
    // Inner: definition 3, function_declarator 2.
    Case { code: "void f(){}", nonzero: &[], t1: 6.0, t2: 3.0, t3: (5.0, 2.0) },
    // Nodes: header 5 + 6, compound, return, binary, a, b.
    // Height 5 on both the parameter and the return path.
    // Inner: 3+2+2+2+2 header, compound 1, return 1, binary 2.
    // C12: a, b under the binary.
    Case {
        code: "int f(int a, int b){ return a + b; }",
        nonzero: &[("C5", 2.0), ("C9", 1.0), ("C12", 2.0)],
        t1: 16.0, t2: 5.0, t3: (15.0, 8.0),
    },
    // Nodes: header 5, compound, labeled, label, goto, label.
    // Height: compound > labeled > goto > label, 5 from the root.
    // Inner: 3+2, compound 1, labeled 2, goto 1.
    Case {
        code: "void f(){ l: goto l; }",
        nonzero: &[("S2", 1.0)],
        t1: 10.0, t2: 5.0, t3: (9.0, 5.0),
    },
    // Nodes: header 5, compound, return, 42. Inner: 3+2+1+1.
    // S1: 42 is not in {-1, 0, 1}.
    Case {
        code: "int f(){ return 42; }",
        nonzero: &[("S1", 1.0), ("C9", 1.0)],
        t1: 8.0, t2: 4.0, t3: (7.0, 4.0),
    },
    // Nodes: header 8, compound, return, three binaries, x, 2, 1, 0.
    // Height: compound > return > - > + > * > x, 7 from the root.
    // Inner: 3+2+1+2, compound 1, return 1, binaries 2 each.
    // S1: only 2 is magic. C12: x, 2, 1, 0 under the outer binary.
    Case {
        code: "int f(int x){ return x * 2 + 1 - 0; }",
        nonzero: &[("S1", 1.0), ("C5", 1.0), ("C9", 1.0), ("C12", 4.0)],
        t1: 17.0, t2: 7.0, t3: (16.0, 9.0),
    },
    // `-1` is a single literal; -1 is not magic.
    Case {
        code: "int f(){ return -1; }",
        nonzero: &[("C9", 1.0)],
        t1: 8.0, t2: 4.0, t3: (7.0, 4.0),
    },
    Case {
        code: "int f(){ return -7; }",
        nonzero: &[("S1", 1.0), ("C9", 1.0)],
        t1: 8.0, t2: 4.0, t3: (7.0, 4.0),
    },
    // Nodes: header 5, compound, declaration, primitive_type,
    // init_declarator, function_declarator, parenthesized_declarator,
    // pointer_declarator, fp, parameter_list, parameter_declaration,
    // primitive_type, g.
    // Height: compound > declaration > init > function > paren > pointer > fp = 8.
    // Inner: 3+2, compound 1, declaration 2, init 2, function 2, paren 1,
    // pointer 1, list 1, parameter 1.
    // S3: declaration > init_declarator > function_declarator.
    // C5: the unnamed `int` parameter of the pointer type.
    Case {
        code: "void f(){ int (*fp)(int) = g; }",
        nonzero: &[("S3", 1.0), ("C5", 1.0), ("C11", 1.0)],
        t1: 17.0, t2: 8.0, t3: (16.0, 10.0),
    },
    // Nodes: header 5, parameter_declaration, primitive_type,
    // function_declarator, paren, pointer, cb, parameter_list,
    // parameter_declaration, primitive_type, compound.
    // Height: definition > declarator > list > parameter > function > paren > pointer > cb = 8.
    // Inner: 3+2, list 1, parameter 2, function 2, paren 1, pointer 1,
    // inner list 1, inner parameter 1.
    Case {
        code: "void f(int (*cb)(int)){}",
        nonzero: &[("S3", 1.0), ("C5", 2.0)],
        t1: 15.0, t2: 8.0, t3: (14.0, 9.0),
    },
    // Nodes: header 5, compound, statement, call, g, args, statement,
    // assignment, x, call, h, args.
    // Height: compound > statement > assignment > call > h = 6.
    // Inner: 3+2, compound 2, statement 1, call 2, statement 1,
    // assignment 2, call 2.
    // S4: only `g();` discards a call result.
    Case {
        code: "void f(){ g(); x = h(); }",
        nonzero: &[("S4", 1.0)],
        t1: 16.0, t2: 6.0, t3: (15.0, 8.0),
    },
    // Nodes: header 8, compound, if, condition_clause, x, statement,
    // call, g, args.
    // Height: compound > if > statement > call > g = 6.
    // Inner: 3+2+1+2, compound 1, if 2, condition 1, statement 1, call 2.
    // C1: one decision, no logical operators. C7: one control level.
    Case {
        code: "void f(int x){ if (x) g(); }",
        nonzero: &[("S4", 1.0), ("S5", 1.0), ("C1", 1.0), ("C5", 1.0), ("C7", 1.0)],
        t1: 16.0, t2: 6.0, t3: (15.0, 9.0),
    },
    // As above plus else_clause, statement, call, h, args.
    // Height: if > else > statement > call > h, 7 from the root.
    // Inner adds: if 3 instead of 2, else 1, statement 1, call 2.
    Case {
        code: "void f(int x){ if (x) g(); else h(); }",
        nonzero: &[("S4", 2.0), ("C1", 1.0), ("C5", 1.0), ("C7", 1.0)],
        t1: 21.0, t2: 7.0, t3: (20.0, 12.0),
    },
    // Nodes: header 11, compound, if, condition, ||, &&, a, b, a, return,
    // 1, return, 0.
    // Height: compound > if > condition > || > && > a = 7.
    // Inner: 3+2+2+2+2, compound 2, if 2, condition 1, || 2, && 2,
    // returns 1 each.
    // C1: 1 + two logical operators in the condition. C12: a, b, a.
    Case {
        code: "int f(int a, int b){ if (a && b || a) return 1; return 0; }",
        nonzero: &[
            ("S5", 1.0), ("C1", 3.0), ("C5", 2.0), ("C7", 1.0), ("C9", 2.0), ("C12", 3.0),
        ],
        t1: 23.0, t2: 7.0, t3: (22.0, 12.0),
    },
    // Nodes: header 8, compound, switch, condition, x, compound, two
    // cases of (case, value, return, literal), default (case, return,
    // literal).
    // Height: compound > switch > compound > case > return > literal = 7.
    // Inner: 3+2+1+2, compound 1, switch 2, condition 1, body 3, cases
    // 2 and 2, default 1, returns 1 each.
    // S1: 10, 2, 20. C1: the two valued cases. C6: both cases sit under
    // the switch. C7: case level 2. C8: the switch holds two cases.
    Case {
        code: "int f(int x){ switch (x) { case 1: return 10; case 2: return 20; default: return 0; } }",
        nonzero: &[
            ("S1", 3.0), ("C1", 2.0), ("C5", 1.0), ("C6", 2.0), ("C7", 2.0), ("C8", 2.0),
            ("C9", 3.0),
        ],
        t1: 24.0, t2: 7.0, t3: (23.0, 14.0),
    },
    // Nodes: header 8, compound, return, conditional, >, x, 0, x, unary, x.
    // Height: compound > return > conditional > > > x = 6.
    // Inner: 3+2+1+2, compound 1, return 1, conditional 3, binary 2, unary 1.
    // C1: the ternary. M3: x is not a pointer.
    Case {
        code: "int f(int x){ return x > 0 ? x : -x; }",
        nonzero: &[("C1", 1.0), ("C5", 1.0), ("C7", 1.0), ("C9", 1.0), ("C12", 2.0)],
        t1: 17.0, t2: 6.0, t3: (16.0, 9.0),
    },
    // Nodes: header 8, compound, while, condition, n, statement, update, n.
    // Height: compound > while > statement > update > n = 6.
    // Inner: 3+2+1+2, compound 1, while 2, condition 1, statement 1, update 1.
    Case {
        code: "void f(int n){ while (n) n--; }",
        nonzero: &[("C1", 1.0), ("C2", 1.0), ("C4", 1.0), ("C5", 1.0), ("C7", 1.0)],
        t1: 15.0, t2: 6.0, t3: (14.0, 9.0),
    },
    // Nodes: header 8, compound, do, compound, statement, update, n,
    // parenthesized, >, n, 0.
    // Height: compound > do > compound > statement > update > n = 7.
    // Inner: 3+2+1+2, compound 1, do 2, body 1, statement 1, update 1,
    // parenthesized 1, binary 2.
    Case {
        code: "void f(int n){ do { n--; } while (n > 0); }",
        nonzero: &[
            ("C1", 1.0), ("C2", 1.0), ("C4", 1.0), ("C5", 1.0), ("C7", 1.0), ("C12", 2.0),
        ],
        t1: 18.0, t2: 7.0, t3: (17.0, 11.0),
    },
    // Nodes: header 8, compound, for, declaration, primitive_type, init,
    // i, 0, <, i, n, update, i, statement, call, g, args, i.
    // Height: compound > for > statement > call > args > i = 7.
    // Inner: 3+2+1+2, compound 1, for 4, declaration 2, init 2, binary 2,
    // update 1, statement 1, call 2, args 1.
    Case {
        code: "void f(int n){ for (int i = 0; i < n; i++) g(i); }",
        nonzero: &[
            ("S4", 1.0), ("C1", 1.0), ("C2", 1.0), ("C4", 1.0), ("C5", 1.0), ("C7", 1.0),
            ("C11", 1.0), ("C12", 2.0),
        ],
        t1: 25.0, t2: 7.0, t3: (24.0, 13.0),
    },
    // Inner loop: for, declaration 5, binary 3, update 2, statement,
    // call, g, args, i, j = 17. Outer: for, 5, 3, 2 plus inner = 28.
    // Nodes: header 8, compound, outer 28.
    // Height: compound > for > for > statement > call > args > i = 8.
    // Inner: 3+2+1+2, compound 1, per loop 4+2+2+2+1, statement 1,
    // call 2, args 2.
    // C3: the outer loop reaches the inner one. C6: inner has a
    // control ancestor. C8: outer holds one.
    Case {
        code: "void f(int n){ for (int i = 0; i < n; i++) for (int j = 0; j < n; j++) g(i, j); }",
        nonzero: &[
            ("S4", 1.0), ("C1", 2.0), ("C2", 2.0), ("C3", 1.0), ("C4", 2.0), ("C5", 1.0),
            ("C6", 1.0), ("C7", 2.0), ("C8", 1.0), ("C11", 2.0), ("C12", 2.0),
        ],
        t1: 37.0, t2: 8.0, t3: (36.0, 18.0),
    },
    // Nodes: header 8, compound, while, condition, n, compound, if,
    // condition, >, n, 5, compound, for, compound, break, statement,
    // update, n.
    // Height: compound > while > compound > if > compound > for >
    // compound > break = 9.
    // Inner: 3+2+1+2, compound 1, while 2, condition 1, body 2, if 2,
    // condition 1, binary 2, compound 1, for 1, compound 1, statement 1,
    // update 1.
    // C1: while, if and for each add 1. C3: while reaches for through
    // non-loop nodes. C4: for is the second loop level. C6: if and for.
    // C7: for is at control level 3. C8: while holds if and for.
    Case {
        code: "void f(int n){ while (n) { if (n > 5) { for (;;) { break; } } n--; } }",
        nonzero: &[
            ("S1", 1.0), ("S5", 1.0), ("C1", 3.0), ("C2", 2.0), ("C3", 1.0), ("C4", 2.0),
            ("C5", 1.0), ("C6", 2.0), ("C7", 3.0), ("C8", 2.0), ("C12", 2.0),
        ],
        t1: 25.0, t2: 9.0, t3: (24.0, 16.0),
    },
    // `...` is an anonymous token. Nodes: header 14, compound, return, a.
    // Inner: 3+2+3+2+2+2, compound 1, return 1.
    Case {
        code: "int f(int a, int b, int c, ...){ return a; }",
        nonzero: &[("C5", 3.0), ("C9", 1.0)],
        t1: 17.0, t2: 5.0, t3: (16.0, 8.0),
    },
    // Nodes: header 8, compound, if, condition, x, compound, if,
    // condition, >, x, 1, compound, statement, call, g, args, else, if,
    // condition, <, x, 0, compound, statement, call, h, args.
    // Height 9 on both inner paths.
    // Inner: 3+2+1+2, compound 1, outer if 3, condition 1, compound 1,
    // if 2, condition 1, binary 2, compound 1, statement 1, call 2,
    // else 1, if 2, condition 1, binary 2, compound 1, statement 1, call 2.
    // S5: both inner ifs lack an else. C6 and C8: two nested ifs.
    Case {
        code: "void f(int x){ if (x) { if (x > 1) { g(); } } else if (x < 0) { h(); } }",
        nonzero: &[
            ("S4", 2.0), ("S5", 2.0), ("C1", 3.0), ("C5", 1.0), ("C6", 2.0), ("C7", 2.0),
            ("C8", 2.0), ("C12", 2.0),
        ],
        t1: 34.0, t2: 9.0, t3: (33.0, 21.0),
    },
    // Nodes: header 8, compound, if, condition, x, return, 1, if,
    // condition, >, x, 2, return, 2, return, 3.
    // Height: compound > if > condition > binary > x = 6.
    // Inner: 3+2+1+2, compound 3, if 2, condition 1, return 1, if 2,
    // condition 1, binary 2, return 1, return 1.
    Case {
        code: "int f(int x){ if (x) return 1; if (x > 2) return 2; return 3; }",
        nonzero: &[
            ("S1", 3.0), ("S5", 2.0), ("C1", 2.0), ("C5", 1.0), ("C7", 1.0), ("C9", 3.0),
            ("C12", 2.0),
        ],
        t1: 23.0, t2: 6.0, t3: (22.0, 13.0),
    },
    // Nodes: header 8, compound, return, /, cast, type_descriptor,
    // primitive_type, x, cast, type_descriptor, primitive_type, 2.
    // Height: compound > return > / > cast > descriptor > type = 7.
    // Inner: 3+2+1+2, compound 1, return 1, binary 2, casts 2 each,
    // descriptors 1 each.
    Case {
        code: "double f(int x){ return (double)x / (float)2; }",
        nonzero: &[("S1", 1.0), ("C5", 1.0), ("C9", 1.0), ("C10", 2.0), ("C12", 2.0)],
        t1: 19.0, t2: 7.0, t3: (18.0, 11.0),
    },
    // Nodes: header 5, compound, (declaration, type, a), (declaration,
    // type, init, b, 1, c), (declaration, type, pointer, s).
    // Height: compound > declaration > init > b = 5.
    // Inner: 3+2, compound 3, declarations 2, 3, 2, init 2, pointer 1.
    Case {
        code: "void f(){ int a; int b = 1, c; char *s; }",
        nonzero: &[("C11", 3.0)],
        t1: 19.0, t2: 5.0, t3: (18.0, 8.0),
    },
    // Nodes: header 14, compound, return, -, +, a, *, b, c, 3.
    // Height: compound > return > - > + > * > b = 7.
    // Inner: 3+2+3+6, compound 1, return 1, binaries 2 each.
    Case {
        code: "int f(int a, int b, int c){ return a + b * c - 3; }",
        nonzero: &[("S1", 1.0), ("C5", 3.0), ("C9", 1.0), ("C12", 4.0)],
        t1: 23.0, t2: 7.0, t3: (22.0, 11.0),
    },
    // Nodes: header 5, compound; first declaration 9 (declaration, type,
    // init, pointer, p, call, malloc, args, 10); second 14 (declaration,
    // type, init, pointer, q, cast, descriptor, type,
    // abstract_pointer_declarator, call, calloc, args, 1, 2); statement,
    // call, free, args, p.
    // Height: compound > declaration > init > cast > call > args > 1 = 8.
    // Inner: 3+2, compound 3, first 2+2+1+2+1, second 2+2+1+2+2+2+2,
    // statement 1, call 2, args 1.
    // M1: malloc and calloc; free is not an allocation.
    Case {
        code: "void f(){ char *p = malloc(10); char *q = (char *)calloc(1, 2); free(p); }",
        nonzero: &[("S1", 2.0), ("S4", 1.0), ("C10", 1.0), ("C11", 2.0), ("M1", 2.0)],
        t1: 34.0, t2: 8.0, t3: (33.0, 18.0),
    },
    // Nodes: header 5, compound; (declaration, type, init, pointer, p,
    // new, type); (declaration, type, init, pointer, a, new, type,
    // new_declarator, 4); statement, call, my_alloc, args.
    // Height: compound > declaration > init > new > new_declarator > 4 = 7.
    // Inner: 3+2, compound 3, declaration 2, init 2, pointer 1, new 1,
    // declaration 2, init 2, pointer 1, new 2, new_declarator 1,
    // statement 1, call 2.
    // M1: two `new` plus a call whose name contains "alloc".
    Case {
        code: "void f(){ int *p = new int; int *a = new int[4]; my_alloc(); }",
        nonzero: &[("S1", 1.0), ("S4", 1.0), ("C11", 2.0), ("M1", 3.0)],
        t1: 26.0, t2: 7.0, t3: (25.0, 14.0),
    },
    // Nodes: header 5 + 3 parameters of 4 (declaration, type, pointer or
    // array declarator, name); compound, statement, assignment,
    // pointer_expression, p, +, subscript, a, subscript_argument_list,
    // 0, field_expression, s, field_identifier.
    // Height: compound > statement > assignment > + > subscript >
    // arguments > 0 = 8.
    // Inner: 3+2+3+6, declarators 1 each, compound 1, statement 1,
    // assignment 2, pointer 1, binary 2, subscript 2, arguments 1, field 2.
    // C12: a, 0, s. M2: *p, a[0], s->x. M3: the sum contains the
    // pointer-typed a.
    Case {
        code: "void f(int *p, int a[], S *s){ *p = a[0] + s->x; }",
        nonzero: &[("C5", 3.0), ("C12", 3.0), ("M2", 3.0), ("M3", 1.0)],
        t1: 30.0, t2: 8.0, t3: (29.0, 17.0),
    },
    // Nodes: header 5 + 3, compound, statement, assignment, field, s,
    // field_identifier, 1.
    // Inner: 3+2+1+2, compound 1, statement 1, assignment 2, field 2.
    // M2: `.` access is not a dereference.
    Case {
        code: "void f(S s){ s.x = 1; }",
        nonzero: &[("C5", 1.0)],
        t1: 15.0, t2: 6.0, t3: (14.0, 8.0),
    },
    // Nodes: header 5 + 4, compound, statement, update, p, statement,
    // assignment, p, +, p, 2.
    // Height 6 on the parameter and assignment paths.
    // Inner: 3+2+1+2, pointer 1, compound 2, statement 1, update 1,
    // statement 1, assignment 2, binary 2.
    // M3: p++ and p + 2.
    Case {
        code: "void f(int *p){ p++; p = p + 2; }",
        nonzero: &[("S1", 1.0), ("C5", 1.0), ("C12", 2.0), ("M3", 2.0)],
        t1: 19.0, t2: 6.0, t3: (18.0, 11.0),
    },
    // Nodes: header 5 + 4 + 3, compound, declaration, type, init,
    // pointer, q, -, p, n, statement, assignment, pointer_expression, q, 0.
    // Inner: 3+2+2, parameters 2 and 2, pointer 1, compound 2,
    // declaration 2, init 2, pointer 1, binary 2, statement 1,
    // assignment 2, dereference 1.
    Case {
        code: "void f(int *p, int n){ int *q = p - n; *q = 0; }",
        nonzero: &[("C5", 2.0), ("C11", 1.0), ("C12", 2.0), ("M2", 1.0), ("M3", 1.0)],
        t1: 26.0, t2: 6.0, t3: (25.0, 14.0),
    },
    // Nodes: header 8, compound, declaration, type, init, pointer, p,
    // address-of, x, statement, assignment, dereference, p, 1.
    // Inner: 3+2+1+2, compound 2, declaration 2, init 2, pointer 1,
    // address-of 1, statement 1, assignment 2, dereference 1.
    // M2: only `*p`. M3: no arithmetic node.
    Case {
        code: "void f(int x){ int *p = &x; *p = 1; }",
        nonzero: &[("C5", 1.0), ("C11", 1.0), ("M2", 1.0)],
        t1: 21.0, t2: 6.0, t3: (20.0, 12.0),
    },
    // Header nodes: definition, type, declarator, f, list, parameter,
    // qualified_identifier, namespace_identifier, template_type,
    // type_identifier, template_argument_list, type_descriptor,
    // primitive_type, reference_declarator, v. Body: compound,
    // for_range_loop, type, x, v, statement, call, g, args, x.
    // Height: definition > declarator > list > parameter > qualified >
    // template_type > arguments > descriptor > type = 9.
    // Inner: 3+2+1+2, qualified 2, template 2, arguments 1,
    // descriptor 1, reference 1, compound 1, loop 4, statement 1,
    // call 2, args 1.
    Case {
        code: "void f(std::vector<int> &v){ for (int x : v) g(x); }",
        nonzero: &[
            ("S4", 1.0), ("C1", 1.0), ("C2", 1.0), ("C4", 1.0), ("C5", 1.0), ("C7", 1.0),
        ],
        t1: 25.0, t2: 9.0, t3: (24.0, 14.0),
    },
    // Nodes: header 5, compound, declaration, placeholder_type_specifier,
    // auto, init, l, lambda, capture_specifier, abstract_function_declarator,
    // list, parameter, type, a, compound, return, a, statement, call, l,
    // args, 1.
    // Height: compound > declaration > init > lambda > declarator > list
    // > parameter > a = 9.
    // Inner: 3+2, compound 2, declaration 2, placeholder 1, init 2,
    // lambda 3, declarator 1, list 1, parameter 2, body 1, return 1,
    // statement 1, call 2, args 1.
    Case {
        code: "void f(){ auto l = [](int a){ return a; }; l(1); }",
        nonzero: &[("S4", 1.0), ("C5", 1.0), ("C9", 1.0), ("C11", 1.0)],
        t1: 26.0, t2: 9.0, t3: (25.0, 15.0),
    },
    // Nodes: header 11, compound, return, &&, >, a, b, >, b, 0.
    // Inner: 3+2+2+2+2, compound 1, return 1, binaries 2 each.
    // C1: logical operators outside a decision do not count.
    Case {
        code: "int f(int a, int b){ return a > b && b > 0; }",
        nonzero: &[("C5", 2.0), ("C9", 1.0), ("C12", 4.0)],
        t1: 20.0, t2: 6.0, t3: (19.0, 10.0),
    },
    // Nodes: header 8, compound, switch, condition, x, compound, case, 1,
    // if, condition, x, statement, call, g, args, break.
    // Height: compound > switch > compound > case > if > statement >
    // call > g = 9.
    // Inner: 3+2+1+2, compound 1, switch 2, condition 1, body 1, case 3,
    // if 2, condition 1, statement 1, call 2.
    // C6: case and if. C7: if at level 3. C8: the switch holds both.
    Case {
        code: "void f(int x){ switch (x) { case 1: if (x) g(); break; } }",
        nonzero: &[
            ("S4", 1.0), ("S5", 1.0), ("C1", 2.0), ("C5", 1.0), ("C6", 2.0), ("C7", 3.0),
            ("C8", 2.0),
        ],
        t1: 23.0, t2: 9.0, t3: (22.0, 13.0),
    },
    // Nodes: header 8, compound, return, conditional, ==, c, char_literal,
    // character, 1, 0.
    // Height: compound > return > conditional > == > char_literal >
    // character = 7.
    // Inner: 3+2+1+2, compound 1, return 1, conditional 3, binary 2,
    // char_literal 1.
    // S1: character literals are not numbers. C12: c and 'a'.
    Case {
        code: "int f(char c){ return c == 'a' ? 1 : 0; }",
        nonzero: &[("C1", 1.0), ("C5", 1.0), ("C7", 1.0), ("C9", 1.0), ("C12", 2.0)],
        t1: 17.0, t2: 7.0, t3: (16.0, 9.0),
    },
    // Nodes: header 5, parameter, type_qualifier, type, pointer, s;
    // compound, statement, call, puts, args, string_literal, string_content.
    // Height: compound > statement > call > args > string > content = 7.
    // Inner: 3+2, list 1, parameter 3, pointer 1, compound 1,
    // statement 1, call 2, args 1, string 1.
    Case {
        code: "void f(const char *s){ puts(\"hi\"); }",
        nonzero: &[("S4", 1.0), ("C5", 1.0)],
        t1: 17.0, t2: 7.0, t3: (16.0, 10.0),
    },
    // Nodes: header 8, compound, if, condition, x, compound, while,
    // condition, x, compound, statement, update, x.
    // Height: compound > if > compound > while > compound > statement >
    // update > x = 9.
    // Inner: 3+2+1+2, compound 1, if 2, condition 1, compound 1, while 2,
    // condition 1, compound 1, statement 1, update 1.
    // C3: a single loop. C6: while under if.
    Case {
        code: "void f(int x){ if (x) { while (x) { x--; } } }",
        nonzero: &[
            ("S5", 1.0), ("C1", 2.0), ("C2", 1.0), ("C4", 1.0), ("C5", 1.0), ("C6", 1.0),
            ("C7", 2.0), ("C8", 1.0),
        ],
        t1: 20.0, t2: 9.0, t3: (19.0, 13.0),
    },
    // Nodes: header 5, compound, goto, label, labeled, label, goto,
    // label, labeled, label, empty statement.
    // Height: compound > labeled > goto > label = 5.
    // Inner: 3+2, compound 3, goto 1, labeled 2, goto 1, labeled 2.
    Case {
        code: "void f(){ goto a; a: goto b; b: ; }",
        nonzero: &[("S2", 2.0)],
        t1: 15.0, t2: 5.0, t3: (14.0, 7.0),
    },
    // Nodes: header 8, compound, statement, assignment, x, <<, x, 3,
    // return, x.
    // Height: compound > statement > assignment > << > x = 6.
    // Inner: 3+2+1+2, compound 2, statement 1, assignment 2, binary 2,
    // return 1.
    Case {
        code: "int f(int x){ x = x << 3; return x; }",
        nonzero: &[("S1", 1.0), ("C5", 1.0), ("C9", 1.0), ("C12", 2.0)],
        t1: 17.0, t2: 6.0, t3: (16.0, 9.0),
    },
];

/// One line per metric whose extracted value differs from the derivation.
pub fn mismatches() -> Vec<String> {
    let catalog = MetricCatalog::default_catalog();
    let table = NodeCategoryTable::default();
    let mut failures = Vec::new();
    for (n, case) in CASES.iter().enumerate() {
        let tree = parse_function(SourceFunction::new(format!("case{n}"), case.code)).unwrap();
        if tree.parse_error() {
            failures.push(format!("{}: parse error", case.code));
            continue;
        }
        let got = extract_features(&tree, &catalog, &table).unwrap();
        for (k, id) in METRIC_IDS.iter().enumerate() {
            let want = match *id {
                "T1" => case.t1,
                "T2" => case.t2,
                "T3" => case.t3.0 / case.t3.1,
                _ => case
                    .nonzero
                    .iter()
                    .find(|(m, _)| m == id)
                    .map_or(0.0, |&(_, v)| v),
            };
            let ok = if *id == "T3" {
                (got.values[k] - want).abs() <= 1e-9
            } else {
                got.values[k] == want
            };
            if !ok {
                failures.push(format!(
                    "{}: {id} = {}, expected {want}",
                    case.code, got.values[k]
                ));
            }
        }
    }
    failures
}
