import { describe, expect, it } from 'vitest';
import { parseAisCsv } from '../src/csv';

const HEADER = 'mmsi,timestamp,lat,lon,sog_kn,cog_deg,ais_type,length_m,beam_m,draft_m,nav_status,name,je_class';

describe('AIS CSV upload parsing', () => {
  it('parses a well-formed file into normalized records', () => {
    const text = [
      HEADER,
      '219018271,2025-03-14T10:00:00Z,44.05,2.05,12.3,245,70,180,28,7.5,0,NORDIC TRADER,2',
      '367001234,2025-03-14T10:00:20Z,44.02,2.08,4.2,,30,,,,,,',
    ].join('\n');
    const { records, warnings } = parseAisCsv(text);
    expect(warnings).toEqual([]);
    expect(records).toHaveLength(2);
    expect(records[0]).toEqual({
      mmsi: 219018271,
      timestamp: '2025-03-14T10:00:00Z',
      lat: 44.05,
      lon: 2.05,
      sog_kn: 12.3,
      cog_deg: 245,
      ais_type: 70,
      length_m: 180,
      beam_m: 28,
      draft_m: 7.5,
      nav_status: 0,
      name: 'NORDIC TRADER',
      je_class: 2,
    });
    // empty optional cells mean "not reported"
    expect(records[1].cog_deg).toBeNull();
    expect(records[1].length_m).toBeNull();
    expect(records[1].name).toBeNull();
  });

  it('normalizes timestamps to Z-suffixed ISO form', () => {
    const text = [
      'mmsi,timestamp,lat,lon,sog_kn,ais_type',
      '219018271,2025-03-14T10:00:00+00:00,44,2,10,70',
    ].join('\n');
    expect(parseAisCsv(text).records[0].timestamp).toBe('2025-03-14T10:00:00Z');
  });

  it('rejects the whole file when a required column is missing', () => {
    const text = 'mmsi,timestamp,lat,lon,ais_type\n1,2025-03-14T10:00:00Z,44,2,70';
    expect(() => parseAisCsv(text))
      .toThrow('missing required column(s): sog_kn');
  });

  it('turns a malformed row into a warning and keeps the rest', () => {
    const text = [
      'mmsi,timestamp,lat,lon,sog_kn,ais_type',
      '219018271,2025-03-14T10:00:00Z,44.05,2.05,12.3,70',
      '367001234,2025-03-14T10:00:20Z,95,2.08,4.2,30',
      '244700001,2025-03-14T10:00:40Z,44.1,2.1,8.0,80',
    ].join('\n');
    const { records, warnings } = parseAisCsv(text);
    expect(records.map((r) => r.mmsi)).toEqual([219018271, 244700001]);
    expect(warnings).toEqual([{ row: 2, message: 'lat out of range: 95' }]);
  });

  it('names the offending field in each warning', () => {
    const text = [
      'mmsi,timestamp,lat,lon,sog_kn,ais_type',
      'twelve,2025-03-14T10:00:00Z,44,2,10,70',
      '219018271,yesterday,44,2,10,70',
      '219018271,2025-03-14T10:00:00Z,44,2,-5,70',
    ].join('\n');
    const { records, warnings } = parseAisCsv(text);
    expect(records).toHaveLength(0);
    expect(warnings.map((w) => w.row)).toEqual([1, 2, 3]);
    expect(warnings[0].message).toContain('mmsi must be an integer');
    expect(warnings[1].message).toContain('timestamp must be ISO 8601');
    expect(warnings[2].message).toContain('sog_kn must be non-negative');
  });

  it('skips blank lines without warning', () => {
    const text = 'mmsi,timestamp,lat,lon,sog_kn,ais_type\n'
      + '219018271,2025-03-14T10:00:00Z,44,2,10,70\n\n';
    const { records, warnings } = parseAisCsv(text);
    expect(records).toHaveLength(1);
    expect(warnings).toEqual([]);
  });
});
