/** Canonical text form for the structured search query the API returns.
 * Mirrors the server's printer: uppercase operators, multi-word phrases
 * quoted, parentheses only where precedence requires them. Edits are sent
 * back as text; the server parses and re-canonicalizes. */

export type QueryNode =
  | { kind: "term"; text: string }
  | { kind: "phrase"; text: string }
  | { kind: "not"; child: QueryNode }
  | { kind: "and"; children: QueryNode[] }
  | { kind: "or"; children: QueryNode[] };

export function printQuery(node: QueryNode): string {
  switch (node.kind) {
    case "term":
      return node.text;
    case "phrase":
      return node.text.includes(" ") ? `"${node.text}"` : node.text;
    case "not": {
      const inner = printQuery(node.child);
      const wrapped =
        node.child.kind === "and" || node.child.kind === "or"
          ? `(${inner})`
          : inner;
      return `NOT ${wrapped}`;
    }
    case "and":
      return node.children
        .map((c) => (c.kind === "or" ? `(${printQuery(c)})` : printQuery(c)))
        .join(" AND ");
    case "or":
      return node.children.map(printQuery).join(" OR ");
  }
}
