"""Render short strings as SVG pixel art, so the text never appears verbatim."""

from __future__ import annotations

import html

from PIL import ImageFont

SCALE = 2


def _glyph_rows(text: str) -> tuple[int, int, list[list[tuple[int, int]]]]:
    """Return (width, height, runs) where runs[y] lists (x, length) of set pixels."""
    font = ImageFont.load_default_imagefont()
    # the bitmap font only covers Latin-1; other characters are drawn as '?'
    text = text.encode("latin-1", "replace").decode("latin-1")
    mask = font.getmask(text, mode="1")
    width, height = mask.size
    rows = []
    for y in range(height):
        runs = []
        x = 0
        while x < width:
            if mask.getpixel((x, y)):
                start = x
                while x < width and mask.getpixel((x, y)):
                    x += 1
                runs.append((start, x - start))
            else:
                x += 1
        rows.append(runs)
    return width, height, rows


def text_to_svg(text: str, label: str | None = None, css_class: str = "mw-asimage") -> str:
    """Inline SVG drawing ``text`` with filled pixel runs.

    ``label`` becomes the ``aria-label``; pass ``None`` to emit no
    alternative text at all.
    """
    width, height, rows = _glyph_rows(text) if text else (0, 0, [])
    parts = []
    for y, runs in enumerate(rows):
        for x, n in runs:
            parts.append(f"M{x * SCALE} {y * SCALE}h{n * SCALE}v{SCALE}h{-n * SCALE}z")
    attrs = [f'class="{css_class}"', 'role="img"',
             f'width="{width * SCALE}"', f'height="{height * SCALE}"',
             f'viewBox="0 0 {width * SCALE} {height * SCALE}"']
    if label is not None:
        attrs.append(f'aria-label="{html.escape(label, quote=True)}"')
    body = f'<path fill="currentColor" d="{"".join(parts)}"/>' if parts else ""
    return f'<svg xmlns="http://www.w3.org/2000/svg" {" ".join(attrs)}>{body}</svg>'
