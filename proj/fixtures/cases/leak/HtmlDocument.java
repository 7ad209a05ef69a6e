package org.apache.lucene.ant;

import org.w3c.dom.Element;
import org.w3c.tidy.Tidy;

import java.io.FileInputStream;
import java.io.IOException;

public class HtmlDocument {
    private Element rawDoc;

    public HtmlDocumentLeaky(File file) throws IOException {
        Tidy tidy = new Tidy();
        tidy.setQuiet(true);
        tidy.setShowWarnings(false);
        org.w3c.dom.Document root =
            tidy.parseDOM(new FileInputStream(file), null);
        rawDoc = root.getDocumentElement();
    }

    public HtmlDocumentFixed(File file) throws IOException {
        Tidy tidy = new Tidy();
        tidy.setQuiet(true);
        tidy.setShowWarnings(false);
        org.w3c.dom.Document root = null;
        InputStream is = new FileInputStream(file);
        try {
            root =  tidy.parseDOM(is, null);
        } finally {
            is.close();
        }
        rawDoc = root.getDocumentElement();
    }
}
