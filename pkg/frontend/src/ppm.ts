/** Minimal binary PPM (P6, maxval 255) decoder.
 *
 * The service serves pattern rasters as PPM; decoding locally and painting
 * the raw pixels onto a canvas keeps the displayed pattern byte-identical
 * to what the service holds (browsers cannot render PPM natively).
 */

export interface PpmImage {
  width: number;
  height: number;
  /** RGB, row-major, 3 bytes per pixel. */
  pixels: Uint8Array;
}

const WHITESPACE = new Set([0x20, 0x09, 0x0a, 0x0d, 0x0b, 0x0c]);

export function decodePpm(data: Uint8Array): PpmImage {
  let pos = 0;

  function readToken(): string {
    while (pos < data.length) {
      if (WHITESPACE.has(data[pos])) {
        pos += 1;
      } else if (data[pos] === 0x23 /* '#' */) {
        while (pos < data.length && data[pos] !== 0x0a) pos += 1;
      } else {
        break;
      }
    }
    const start = pos;
    while (pos < data.length && !WHITESPACE.has(data[pos])) pos += 1;
    if (start === pos) throw new Error('truncated PPM header');
    return String.fromCharCode(...data.subarray(start, pos));
  }

  const magic = readToken();
  if (magic !== 'P6') throw new Error(`expected P6, got ${magic}`);
  const width = parseInt(readToken(), 10);
  const height = parseInt(readToken(), 10);
  const maxval = parseInt(readToken(), 10);
  if (!(width > 0 && height > 0)) throw new Error('bad PPM dimensions');
  if (maxval !== 255) throw new Error(`unsupported maxval ${maxval}`);
  pos += 1; // single whitespace byte separates header from raster
  const need = width * height * 3;
  const raster = data.subarray(pos, pos + need);
  if (raster.length !== need) throw new Error('truncated PPM raster');
  return { width, height, pixels: new Uint8Array(raster) };
}

/** Expand RGB bytes to the RGBA layout ImageData wants. */
export function toRgba(img: PpmImage): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(new ArrayBuffer(img.width * img.height * 4));
  for (let i = 0, j = 0; i < img.pixels.length; i += 3, j += 4) {
    out[j] = img.pixels[i];
    out[j + 1] = img.pixels[i + 1];
    out[j + 2] = img.pixels[i + 2];
    out[j + 3] = 255;
  }
  return out;
}
