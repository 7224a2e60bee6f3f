/** Minimal deterministic SVG assembly: plain strings, no timestamps. */

export type Attrs = Record<string, string | number>;

export function el(tag: string, attrs: Attrs, children: string[] = [], text?: string): string {
  const parts = Object.entries(attrs)
    .map(([k, v]) => `${k}="${String(v)}"`)
    .join(" ");
  const open = parts.length > 0 ? `<${tag} ${parts}>` : `<${tag}>`;
  if (children.length === 0 && text === undefined) {
    return parts.length > 0 ? `<${tag} ${parts}/>` : `<${tag}/>`;
  }
  return `${open}${text ?? ""}${children.join("")}</${tag}>`;
}

export function document(width: number, height: number, children: string[]): string {
  return (
    `<svg xmlns="http://www.w3.org/2000/svg" width="${width}" height="${height}" ` +
    `viewBox="0 0 ${width} ${height}" font-family="sans-serif">` +
    children.join("") +
    `</svg>\n`
  );
}

/** Fixed-precision pixel coordinates keep output byte-stable. */
export function px(v: number): string {
  return v.toFixed(2);
}
