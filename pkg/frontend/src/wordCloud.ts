// Word-cloud items: frequency maps to opacity (the denser the count,
// the more saturated the entry). Layout aesthetics stay minimal.

export interface CloudItem {
  text: string;
  count: number;
  opacity: number; // in [MIN_OPACITY, 1]
}

const MIN_OPACITY = 0.25;

export function buildWordCloud(frequencies: Record<string, number>): CloudItem[] {
  const entries = Object.entries(frequencies).filter(([, count]) => count > 0);
  if (entries.length === 0) return [];
  const max = Math.max(...entries.map(([, count]) => count));
  return entries
    .map(([text, count]) => ({
      text,
      count,
      opacity: MIN_OPACITY + (1 - MIN_OPACITY) * (count / max),
    }))
    .sort((a, b) => b.count - a.count || a.text.localeCompare(b.text));
}

// Seal word cloud: background opacity from seals on this scroll, frame
// shade from corpus-wide counts, clustered by dynasty.
export interface SealCloudItem extends CloudItem {
  sealerId: string;
  frameShade: number;
  dynasty: string | null;
}

export function buildSealCloud(
  sealCounts: Record<string, number>,
  corpusCounts: Record<string, number>,
  dynasties: Record<string, string | null>,
  names: Record<string, string>,
): Map<string, SealCloudItem[]> {
  const base = buildWordCloud(sealCounts);
  const corpusMax = Math.max(1, ...Object.values(corpusCounts));
  const byDynasty = new Map<string, SealCloudItem[]>();
  for (const item of base) {
    const dynasty = dynasties[item.text] ?? null;
    const enriched: SealCloudItem = {
      ...item,
      text: names[item.text] ?? item.text,
      sealerId: item.text,
      frameShade: (corpusCounts[item.text] ?? 0) / corpusMax,
      dynasty,
    };
    const key = dynasty ?? "unknown";
    const bucket = byDynasty.get(key) ?? [];
    bucket.push(enriched);
    byDynasty.set(key, bucket);
  }
  return byDynasty;
}
