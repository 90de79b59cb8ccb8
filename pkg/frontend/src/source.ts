/** Source pane: shows a slice of the linked file with the target line
 * highlighted and scrolled into view. */

import {sourceSlice} from './api.js';

const CONTEXT_LINES = 40;

export class SourcePane {
  private header: HTMLElement;
  private body: HTMLElement;

  constructor(container: HTMLElement) {
    this.header = document.createElement('div');
    this.header.className = 'source-header';
    this.header.textContent = 'No source linked. Right-click a frame to open its code.';
    this.body = document.createElement('pre');
    this.body.className = 'source-body';
    container.appendChild(this.header);
    container.appendChild(this.body);
  }

  async show(file: string, line: number): Promise<void> {
    const from = Math.max(line - CONTEXT_LINES, 1);
    const to = line + CONTEXT_LINES;
    this.header.textContent = `${file}:${line}`;
    this.body.textContent = '';
    let text: string;
    try {
      text = await sourceSlice(file, from, to);
    } catch (err) {
      this.body.textContent = `cannot load ${file}: ${(err as Error).message}`;
      return;
    }
    text.split('\n').forEach((content, offset) => {
      const lineno = from + offset;
      const row = document.createElement('div');
      row.className = lineno === line ? 'source-line highlight' : 'source-line';
      const num = document.createElement('span');
      num.className = 'lineno';
      num.textContent = String(lineno).padStart(5);
      row.appendChild(num);
      row.appendChild(document.createTextNode(' ' + content));
      this.body.appendChild(row);
      if (lineno === line) {
        queueMicrotask(() => row.scrollIntoView({block: 'center'}));
      }
    });
  }
}
